#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lade/array.hpp"
#include "lade/autoencoder.hpp"
#include "lade/lde.hpp"
#include "lade/parzen.hpp"
#include "lade/rng.hpp"

namespace lade {

// Monte-Carlo estimate of E[log_density_fn] over rows presumed drawn from the
// density itself: the entropy-limited ceiling a model can reach on held-out
// data from that source.
inline MeanStderr mc_cross_entropy_oracle(
    const std::function<double(const double*, std::size_t)>& log_density_fn,
    const DenseArray& samples) {
  require_rank(samples, 2, "mc oracle: samples");
  const std::size_t n = samples.dim(0), d = samples.dim(1);
  if (n < 2) throw ParameterError("mc oracle: need at least 2 samples");
  MeanStderr r;
  r.n = n;
  double acc = 0.0;
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    vals[i] = log_density_fn(samples.ptr() + i * d, d);
    acc += vals[i];
  }
  r.mean = acc / static_cast<double>(n);
  double var = 0.0;
  for (double v : vals) var += (v - r.mean) * (v - r.mean);
  r.se = std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n));
  return r;
}

struct CausalityReport {
  bool pass = true;
  std::size_t trials = 0;
  // First counterexample, valid when !pass.
  std::size_t trial = 0;
  std::size_t perturbed_coord = 0; // 0-based j
  double delta = 0.0;
  std::size_t position = 0; // 0-based i <= j that changed
  std::string field;        // "pi", "mu", or "sigma"

  std::string describe() const {
    if (pass) return "pass (" + std::to_string(trials) + " trials)";
    std::ostringstream os;
    os << "FAIL at trial " << trial << ": perturbing coordinate " << perturbed_coord << " by "
       << delta << " changed " << field << " at position " << position;
    return os.str();
  }
};

// Perturbs one coordinate of a random z by each delta in {+-0.1, +-10}, reruns
// the forward pass with the same batch shape, and demands bit-identical
// mixture parameters at every position up to and including the perturbed
// coordinate. Takes the forward as a functor so a deliberately broken forward
// can be checked against it too.
template <typename Fwd>
CausalityReport causality_check_fn(std::size_t D, Fwd&& fwd, std::size_t trials,
                                   std::uint64_t seed) {
  if (trials < 1) throw ParameterError("causality_check: trials must be >= 1");
  Rng rng(seed);
  CausalityReport rep;
  rep.trials = trials;
  const double deltas[4] = {0.1, -0.1, 10.0, -10.0};
  for (std::size_t trial = 0; trial < trials; ++trial) {
    DenseArray z({1, D});
    for (std::size_t i = 0; i < D; ++i) z(0, i) = 2.0 * rng.normal();
    const std::size_t j = rng.index(D);
    const MdnBatch base = fwd(static_cast<const DenseArray&>(z));
    const std::size_t K = base.k();
    for (double delta : deltas) {
      DenseArray zp = z;
      zp(0, j) += delta;
      const MdnBatch pert = fwd(static_cast<const DenseArray&>(zp));
      auto differs = [&](const DenseArray& a, const DenseArray& b, std::size_t i) {
        return std::memcmp(a.ptr() + i * K, b.ptr() + i * K, K * sizeof(double)) != 0;
      };
      for (std::size_t i = 0; i <= j; ++i) {
        const char* field = nullptr;
        if (differs(*base.log_pi, *pert.log_pi, i)) field = "pi";
        else if (differs(*base.mu, *pert.mu, i)) field = "mu";
        else if (differs(*base.sigma, *pert.sigma, i)) field = "sigma";
        if (field != nullptr) {
          rep.pass = false;
          rep.trial = trial;
          rep.perturbed_coord = j;
          rep.delta = delta;
          rep.position = i;
          rep.field = field;
          return rep;
        }
      }
    }
  }
  return rep;
}

inline CausalityReport causality_check(const LdeModel& model, std::size_t trials,
                                       std::uint64_t seed) {
  return causality_check_fn(
      model.config.latent_dim, [&](const DenseArray& z) { return lde_forward(model, z); }, trials,
      seed);
}

// Encode two data points, walk the latent segment between them, and score each
// waypoint under the density model. Optionally returns the latent rows and the
// decoded waypoints.
inline std::vector<double> interpolation_loglik(const AeModel& ae, const LdeModel& lde,
                                                const DenseArray& x0, const DenseArray& x1,
                                                const std::vector<double>& alphas,
                                                DenseArray* latents_out = nullptr,
                                                DenseArray* decoded_out = nullptr) {
  require_rank(x0, 1, "interpolation: x0");
  require_rank(x1, 1, "interpolation: x1");
  if (!x0.same_shape(x1)) throw DimensionError("interpolation: endpoint shapes differ");
  const std::size_t in_dim = x0.dim(0);
  DenseArray pair({2, in_dim});
  std::copy(x0.ptr(), x0.ptr() + in_dim, pair.ptr());
  std::copy(x1.ptr(), x1.ptr() + in_dim, pair.ptr() + in_dim);
  DenseArray z = encode(ae, pair);
  DenseArray z0({z.dim(1)}), z1({z.dim(1)});
  std::copy(z.ptr(), z.ptr() + z.dim(1), z0.ptr());
  std::copy(z.ptr() + z.dim(1), z.ptr() + 2 * z.dim(1), z1.ptr());
  DenseArray path = interpolate_latents(z0, z1, alphas);
  DenseArray ld = lde_log_density(lde, path);
  if (latents_out) *latents_out = path;
  if (decoded_out) *decoded_out = decode(ae, path);
  return std::vector<double>(ld.ptr(), ld.ptr() + ld.size());
}

}  // namespace lade
