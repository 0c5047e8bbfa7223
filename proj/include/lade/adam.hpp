#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lade/array.hpp"
#include "lade/errors.hpp"

namespace lade {

// Adam with bias correction. Moment buffers are aligned one-to-one with the
// parameter list passed at init; step() must receive the same list.
struct AdamState {
  double alpha = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<DenseArray> m;
  std::vector<DenseArray> v;
};

inline AdamState adam_init(const std::vector<DenseArray*>& params, double alpha,
                           double beta1 = 0.5, double beta2 = 0.999, double eps = 1e-8) {
  if (!(alpha > 0.0)) throw ParameterError("adam: alpha must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ParameterError("adam: betas must lie in [0,1)");
  AdamState s;
  s.alpha = alpha;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const DenseArray* p : params) {
    s.m.emplace_back(p->shape());
    s.v.emplace_back(p->shape());
  }
  return s;
}

inline void adam_step(AdamState& s, const std::vector<DenseArray*>& params,
                      const std::vector<const DenseArray*>& grads) {
  if (params.size() != s.m.size() || grads.size() != s.m.size())
    throw DimensionError("adam_step: parameter list does not match optimizer state");
  s.t += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    DenseArray& p = *params[i];
    const DenseArray& g = *grads[i];
    if (!p.same_shape(s.m[i]) || !g.same_shape(s.m[i]))
      throw DimensionError("adam_step: shape mismatch at parameter " + std::to_string(i));
    double* mp = s.m[i].ptr();
    double* vp = s.v[i].ptr();
    double* pp = p.ptr();
    const double* gp = g.ptr();
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!std::isfinite(gp[j])) throw ValueError("adam_step: non-finite gradient");
      mp[j] = s.beta1 * mp[j] + (1.0 - s.beta1) * gp[j];
      vp[j] = s.beta2 * vp[j] + (1.0 - s.beta2) * gp[j] * gp[j];
      const double mhat = mp[j] / bc1;
      const double vhat = vp[j] / bc2;
      pp[j] -= s.alpha * mhat / (std::sqrt(vhat) + s.eps);
    }
  }
}

}  // namespace lade
