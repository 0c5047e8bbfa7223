#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "lade/array.hpp"
#include "lade/errors.hpp"

namespace lade {

// Full round-trip precision for every numeric cell.
inline std::string csv_num(double x) {
  std::ostringstream ss;
  ss << std::setprecision(17) << x;
  return ss.str();
}

inline void csv_write_matrix(const std::string& path, const std::vector<std::string>& header,
                             const DenseArray& rows) {
  if (rows.shape().size() != 2) throw DimensionError("csv_write_matrix: rank-2 array required");
  if (header.size() != rows.shape()[1])
    throw DimensionError("csv_write_matrix: header width " + std::to_string(header.size()) +
                         " != column count " + std::to_string(rows.shape()[1]));
  std::ofstream f(path);
  if (!f) throw IoError("csv: cannot open " + path + " for writing");
  for (std::size_t j = 0; j < header.size(); ++j) f << (j ? "," : "") << header[j];
  f << "\n";
  const std::size_t n = rows.shape()[0], d = rows.shape()[1];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) f << (j ? "," : "") << csv_num(rows(i, j));
    f << "\n";
  }
  if (!f) throw IoError("csv: write failed for " + path);
}

// Per-step training curve: step index starts at 1.
inline void csv_write_loss(const std::string& path, const std::vector<double>& loss) {
  std::ofstream f(path);
  if (!f) throw IoError("csv: cannot open " + path + " for writing");
  f << "step,loss\n";
  for (std::size_t i = 0; i < loss.size(); ++i) f << (i + 1) << "," << csv_num(loss[i]) << "\n";
  if (!f) throw IoError("csv: write failed for " + path);
}

struct ReportRow {
  std::string metric;
  double value = 0.0;
  double stderr_ = 0.0;
  bool has_stderr = false;
};

inline void csv_write_report(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("csv: cannot open " + path + " for writing");
  f << "metric,value,stderr\n";
  for (const auto& r : rows) {
    f << r.metric << "," << csv_num(r.value) << ",";
    if (r.has_stderr) f << csv_num(r.stderr_);
    f << "\n";
  }
  if (!f) throw IoError("csv: write failed for " + path);
}

// Minimal reader used by the plot command: numeric cells only, header skipped.
inline DenseArray csv_read_matrix(const std::string& path, std::vector<std::string>* header_out = nullptr) {
  std::ifstream f(path);
  if (!f) throw IoError("csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("csv: empty file " + path);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty()) throw IoError("csv: empty header in " + path);
  std::vector<double> vals;
  std::size_t n = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t got = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("csv: non-numeric cell '" + cell + "' in " + path);
      }
      ++got;
    }
    if (got != header.size())
      throw IoError("csv: ragged row in " + path + " (" + std::to_string(got) + " cells, expected " +
                    std::to_string(header.size()) + ")");
    ++n;
  }
  if (header_out) *header_out = header;
  return DenseArray({n, header.size()}, std::move(vals));
}

}  // namespace lade
