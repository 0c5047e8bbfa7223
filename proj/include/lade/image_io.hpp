#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "lade/array.hpp"
#include "lade/errors.hpp"

namespace lade {

// Binary PGM (P5), maxval 255.
inline void pgm_write(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::size_t h, std::size_t w) {
  if (pixels.size() != h * w) throw DimensionError("pgm_write: pixel count mismatch");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("pgm_write: cannot open " + path);
  f << "P5\n" << w << " " << h << "\n255\n";
  f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!f) throw IoError("pgm_write: write failed for " + path);
}

// Binary PPM (P6), interleaved RGB, maxval 255.
inline void ppm_write(const std::string& path, const std::vector<std::uint8_t>& rgb,
                      std::size_t h, std::size_t w) {
  if (rgb.size() != 3 * h * w) throw DimensionError("ppm_write: pixel count mismatch");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("ppm_write: cannot open " + path);
  f << "P6\n" << w << " " << h << "\n255\n";
  f.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!f) throw IoError("ppm_write: write failed for " + path);
}

namespace detail {
inline int pgm_token(std::istream& in) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF) throw IoError("pgm_read: truncated header");
  int v = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw IoError("pgm_read: malformed header token");
  return v;
}
}  // namespace detail

inline std::vector<std::uint8_t> pgm_read(const std::string& path, std::size_t* h_out,
                                          std::size_t* w_out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("pgm_read: cannot open " + path);
  char m0 = 0, m1 = 0;
  f.get(m0);
  f.get(m1);
  if (m0 != 'P' || m1 != '5') throw IoError("pgm_read: not a binary PGM (P5): " + path);
  const int w = detail::pgm_token(f);
  const int h = detail::pgm_token(f);
  const int maxval = detail::pgm_token(f);
  if (w < 1 || h < 1) throw IoError("pgm_read: bad dimensions in " + path);
  if (maxval != 255) throw IoError("pgm_read: only maxval 255 supported: " + path);
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  f.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (f.gcount() != static_cast<std::streamsize>(pixels.size()))
    throw IoError("pgm_read: truncated payload in " + path);
  if (h_out) *h_out = static_cast<std::size_t>(h);
  if (w_out) *w_out = static_cast<std::size_t>(w);
  return pixels;
}

// Tiles [n x h*w] rows of unit-range intensities into one byte image, row-major
// with `cols` tiles per row and a 1px separator.
inline std::vector<std::uint8_t> image_grid(const DenseArray& images, std::size_t h,
                                            std::size_t w, std::size_t cols, std::size_t* gh_out,
                                            std::size_t* gw_out) {
  require_rank(images, 2, "image_grid: images");
  if (images.dim(1) != h * w) throw DimensionError("image_grid: row width is not h*w");
  if (cols < 1) throw ParameterError("image_grid: cols must be >= 1");
  const std::size_t n = images.dim(0);
  const std::size_t rows = (n + cols - 1) / cols;
  const std::size_t gh = rows * (h + 1) + 1, gw = cols * (w + 1) + 1;
  std::vector<std::uint8_t> grid(gh * gw, 32);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r0 = (i / cols) * (h + 1) + 1, c0 = (i % cols) * (w + 1) + 1;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        double v = images(i, y * w + x);
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        grid[(r0 + y) * gw + (c0 + x)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
  }
  if (gh_out) *gh_out = gh;
  if (gw_out) *gw_out = gw;
  return grid;
}

}  // namespace lade
