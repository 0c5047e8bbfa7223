#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "lade/array.hpp"
#include "lade/errors.hpp"

namespace lade {

// Fixed 800x800 canvas with a 60px margin on every side. Data coordinates are
// mapped into the inner box; an empty series still yields a valid document
// with axes so downstream viewers never see a zero-byte file.
namespace svg_detail {

constexpr double kCanvas = 800.0;
constexpr double kMargin = 60.0;

struct Mapper {
  double xmin, xmax, ymin, ymax;
  double px(double x) const {
    const double s = (xmax > xmin) ? (x - xmin) / (xmax - xmin) : 0.5;
    return kMargin + s * (kCanvas - 2 * kMargin);
  }
  double py(double y) const {
    const double s = (ymax > ymin) ? (y - ymin) / (ymax - ymin) : 0.5;
    return kCanvas - kMargin - s * (kCanvas - 2 * kMargin);
  }
};

inline std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

inline void open_doc(std::ostream& f, const std::string& title) {
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
       "viewBox=\"0 0 800 800\">\n";
  f << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"#ffffff\"/>\n";
  f << "<text x=\"400\" y=\"32\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"20\">" << title << "</text>\n";
  // axis frame
  f << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << (kCanvas - 2 * kMargin)
    << "\" height=\"" << (kCanvas - 2 * kMargin)
    << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
}

inline void axis_labels(std::ostream& f, const Mapper& m) {
  f << "<text x=\"" << kMargin << "\" y=\"" << (kCanvas - kMargin + 24)
    << "\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(m.xmin) << "</text>\n";
  f << "<text x=\"" << (kCanvas - kMargin) << "\" y=\"" << (kCanvas - kMargin + 24)
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(m.xmax)
    << "</text>\n";
  f << "<text x=\"" << (kMargin - 8) << "\" y=\"" << (kCanvas - kMargin)
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(m.ymin)
    << "</text>\n";
  f << "<text x=\"" << (kMargin - 8) << "\" y=\"" << (kMargin + 12)
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(m.ymax)
    << "</text>\n";
}

inline Mapper bounds_of(const std::vector<const DenseArray*>& sets) {
  Mapper m{0.0, 1.0, 0.0, 1.0};
  bool any = false;
  for (const DenseArray* a : sets) {
    if (!a) continue;
    const std::size_t n = a->shape()[0];
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (*a)(i, 0), y = (*a)(i, 1);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!any) {
        m.xmin = m.xmax = x;
        m.ymin = m.ymax = y;
        any = true;
      } else {
        m.xmin = std::min(m.xmin, x);
        m.xmax = std::max(m.xmax, x);
        m.ymin = std::min(m.ymin, y);
        m.ymax = std::max(m.ymax, y);
      }
    }
  }
  // pad 5% so boundary points are visible
  const double dx = (m.xmax - m.xmin) * 0.05, dy = (m.ymax - m.ymin) * 0.05;
  m.xmin -= dx;
  m.xmax += dx;
  m.ymin -= dy;
  m.ymax += dy;
  return m;
}

inline void scatter_layer(std::ostream& f, const Mapper& m, const DenseArray& pts,
                          const std::string& color, double r) {
  const std::size_t n = pts.shape()[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pts(i, 0), y = pts(i, 1);
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    f << "<circle cx=\"" << fmt(m.px(x)) << "\" cy=\"" << fmt(m.py(y)) << "\" r=\"" << r
      << "\" fill=\"" << color << "\" fill-opacity=\"0.6\"/>\n";
  }
}

}  // namespace svg_detail

// Scatter of model samples over an optional reference cloud. The reference is
// drawn first (beneath) in orange, the samples on top in blue.
inline void svg_scatter(const std::string& path, const DenseArray& samples,
                        const DenseArray* reference, const std::string& title) {
  if (samples.shape().size() != 2 || samples.shape()[1] != 2)
    throw DimensionError("svg_scatter: samples must be [n x 2]");
  if (reference && (reference->shape().size() != 2 || reference->shape()[1] != 2))
    throw DimensionError("svg_scatter: reference must be [n x 2]");
  std::ofstream f(path);
  if (!f) throw IoError("svg: cannot open " + path + " for writing");
  svg_detail::open_doc(f, title);
  const svg_detail::Mapper m = svg_detail::bounds_of({&samples, reference});
  svg_detail::axis_labels(f, m);
  if (reference) svg_detail::scatter_layer(f, m, *reference, "#ff7f0e", 2.0);
  svg_detail::scatter_layer(f, m, samples, "#1f77b4", 2.0);
  f << "</svg>\n";
  if (!f) throw IoError("svg: write failed for " + path);
}

// Line plot of one or more y-series over a shared x (training curves).
inline void svg_lines(const std::string& path, const std::vector<double>& x,
                      const std::vector<std::vector<double>>& series,
                      const std::vector<std::string>& names, const std::string& title) {
  if (series.size() != names.size())
    throw DimensionError("svg_lines: one name per series required");
  for (const auto& s : series)
    if (s.size() != x.size()) throw DimensionError("svg_lines: series length != x length");
  std::ofstream f(path);
  if (!f) throw IoError("svg: cannot open " + path + " for writing");
  svg_detail::open_doc(f, title);
  svg_detail::Mapper m{0.0, 1.0, 0.0, 1.0};
  bool any = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (const auto& s : series) {
      if (!std::isfinite(x[i]) || !std::isfinite(s[i])) continue;
      if (!any) {
        m.xmin = m.xmax = x[i];
        m.ymin = m.ymax = s[i];
        any = true;
      } else {
        m.xmin = std::min(m.xmin, x[i]);
        m.xmax = std::max(m.xmax, x[i]);
        m.ymin = std::min(m.ymin, s[i]);
        m.ymax = std::max(m.ymax, s[i]);
      }
    }
  }
  const double dy = (m.ymax - m.ymin) * 0.05;
  m.ymin -= dy;
  m.ymax += dy;
  svg_detail::axis_labels(f, m);
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = palette[k % 5];
    f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(series[k][i])) continue;
      f << svg_detail::fmt(m.px(x[i])) << "," << svg_detail::fmt(m.py(series[k][i])) << " ";
    }
    f << "\"/>\n";
    f << "<text x=\"" << (svg_detail::kCanvas - svg_detail::kMargin - 8) << "\" y=\""
      << (svg_detail::kMargin + 20 + 18 * static_cast<double>(k))
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"13\" fill=\"" << color
      << "\">" << names[k] << "</text>\n";
  }
  f << "</svg>\n";
  if (!f) throw IoError("svg: write failed for " + path);
}

}  // namespace lade
