#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numeric>
#include <vector>

#include "lade/array.hpp"
#include "lade/blas.hpp"
#include "lade/errors.hpp"

namespace lade {

struct ParzenEstimate {
  DenseArray support; // [n x d]
  double sigma = 0.0;
};

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

namespace detail {

// Order-free sum of exp(e_j - mx), e_j <= mx: each term lands on a 2^-62 grid
// and is accumulated in a 128-bit integer, so the result is exactly invariant
// under any permutation of the terms. The grid error is ~1e-15 relative, below
// double rounding noise for float-ordered summation.
class InvariantExpSum {
 public:
  void add(double shifted_exponent) {
    const double term = std::exp(shifted_exponent); // in [0, 1]
    acc_ += static_cast<unsigned long long>(term * 0x1p62 + 0.5);
  }
  double value() const { return static_cast<double>(acc_) * 0x1p-62; }

 private:
  unsigned __int128 acc_ = 0;
};

// Squared distances from each row of x [m x d] to each row of s [n x d],
// written into out[m x n], via ||x||^2 + ||s||^2 - 2 x.s with a matrix product
// for the cross terms. Each entry depends on its own row pair only.
inline void pairwise_sqdist(const double* x, std::size_t m, const double* s, std::size_t n,
                            std::size_t d, double* out) {
  std::vector<double> xn(m), sn(n);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* r = x + i * d;
    for (std::size_t k = 0; k < d; ++k) acc += r[k] * r[k];
    xn[i] = acc;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    const double* r = s + j * d;
    for (std::size_t k = 0; k < d; ++k) acc += r[k] * r[k];
    sn[j] = acc;
  }
  gemm_rm(false, true, m, n, d, -2.0, x, d, s, d, 0.0, out, n);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = row[j] + xn[i] + sn[j];
      row[j] = v > 0.0 ? v : 0.0;
    }
  }
}

}  // namespace detail

// Mean and standard error (sample std over sqrt(m)) of the kernel-density
// log-likelihood log[(1/n) sum_j N(x; s_j, sigma^2 I)] over the test rows.
inline MeanStderr parzen_loglik(const ParzenEstimate& est, const DenseArray& test) {
  if (!(est.sigma > 0.0)) throw ParameterError("parzen: sigma must be > 0");
  require_rank(est.support, 2, "parzen: support");
  require_rank(test, 2, "parzen: test");
  const std::size_t n = est.support.dim(0), d = est.support.dim(1);
  const std::size_t m = test.dim(0);
  if (n < 1) throw ParameterError("parzen: empty support");
  if (m < 1) throw ParameterError("parzen: empty test set");
  if (test.dim(1) != d)
    throw DimensionError("parzen: test dim " + std::to_string(test.dim(1)) + " vs support dim " +
                         std::to_string(d));
  const double inv2s2 = 1.0 / (2.0 * est.sigma * est.sigma);
  const double log_norm =
      -std::log(static_cast<double>(n)) -
      0.5 * static_cast<double>(d) * std::log(2.0 * 3.14159265358979323846 * est.sigma * est.sigma);

  std::vector<double> ll(m);
  const std::size_t block = std::max<std::size_t>(1, (8u << 20) / std::max<std::size_t>(n, 1));
  std::vector<double> dist(std::min(block, m) * n);
  for (std::size_t i0 = 0; i0 < m; i0 += block) {
    const std::size_t bm = std::min(block, m - i0);
    detail::pairwise_sqdist(test.ptr() + i0 * d, bm, est.support.ptr(), n, d, dist.data());
    for (std::size_t i = 0; i < bm; ++i) {
      const double* row = dist.data() + i * n;
      double mn = row[0];
      for (std::size_t j = 1; j < n; ++j) mn = std::min(mn, row[j]);
      detail::InvariantExpSum sum;
      for (std::size_t j = 0; j < n; ++j) sum.add((mn - row[j]) * inv2s2);
      ll[i0 + i] = -mn * inv2s2 + std::log(sum.value()) + log_norm;
    }
  }
  MeanStderr r;
  r.n = m;
  double acc = 0.0;
  for (double v : ll) acc += v;
  r.mean = acc / static_cast<double>(m);
  double var = 0.0;
  for (double v : ll) var += (v - r.mean) * (v - r.mean);
  r.se = m > 1 ? std::sqrt(var / static_cast<double>(m - 1) / static_cast<double>(m)) : 0.0;
  return r;
}

// Argmax of validation log-likelihood over the grid, ties to the smaller
// sigma. Warns when the winner sits on a grid endpoint, since that suggests
// the grid does not bracket the optimum.
inline double bandwidth_grid_search(const DenseArray& support, const DenseArray& validation,
                                    const std::vector<double>& grid, bool warn_on_edge = true) {
  if (grid.empty()) throw ParameterError("bandwidth search: empty grid");
  for (double s : grid)
    if (!(s > 0.0)) throw ParameterError("bandwidth search: grid values must be > 0");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  double best_sigma = sorted[0];
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double s : sorted) {
    const double ll = parzen_loglik(ParzenEstimate{support, s}, validation).mean;
    if (ll > best_ll) {
      best_ll = ll;
      best_sigma = s;
    }
  }
  if (warn_on_edge && sorted.size() > 1 &&
      (best_sigma == sorted.front() || best_sigma == sorted.back()))
    std::cerr << "warning: bandwidth " << best_sigma
              << " lies on the grid boundary; widen the grid\n";
  return best_sigma;
}

inline std::vector<double> log_spaced_grid(double lo = 0.01, double hi = 1.0,
                                           std::size_t points = 20) {
  if (!(lo > 0.0) || !(hi > lo)) throw ParameterError("log grid: need 0 < lo < hi");
  if (points < 2) throw ParameterError("log grid: need at least 2 points");
  std::vector<double> g(points);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace lade
