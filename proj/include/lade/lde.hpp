#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lade/array.hpp"
#include "lade/rng.hpp"
#include "lade/tape.hpp"

namespace lade {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Autoregressive mixture model over D latent coordinates: a stack of dilated
// causal 1-d convolutions feeds a 1x1-conv head that emits, per coordinate, a
// K-component univariate Gaussian mixture conditioned on the coordinates
// before it.
struct LdeConfig {
  std::size_t latent_dim = 0;    // D
  std::size_t mixture_count = 0; // K
  std::size_t filter_size = 2;   // s
  double sigma_floor = 1e-3;

  // Smallest L with s^L >= D.
  std::size_t layer_count() const {
    std::size_t l = 0, reach = 1;
    while (reach < latent_dim) {
      reach *= filter_size;
      ++l;
    }
    return l;
  }

  // Layer l of 1..L carries 2^(l+3) channels.
  std::vector<std::size_t> channels() const {
    std::vector<std::size_t> c(layer_count());
    for (std::size_t l = 0; l < c.size(); ++l) c[l] = std::size_t{1} << (l + 4);
    return c;
  }

  void validate() const {
    if (latent_dim < 1) throw ConfigError("lde: latent_dim must be >= 1");
    if (mixture_count < 1) throw ConfigError("lde: mixture_count must be >= 1");
    if (filter_size < 2) throw ConfigError("lde: filter_size must be >= 2");
    if (!(sigma_floor > 0.0)) throw ConfigError("lde: sigma_floor must be > 0");
  }
};

struct LdeModel {
  LdeConfig config;
  std::vector<DenseArray> conv_w; // layer l: [C_l x C_{l-1} x s], C_0 = 2
  std::vector<DenseArray> conv_b; // layer l: [C_l]
  DenseArray head_w;              // [3K x C_L x 1]: K means, K log-scales, K mixture logits
  DenseArray head_b;              // [3K]

  std::vector<DenseArray*> parameters() {
    std::vector<DenseArray*> p;
    for (std::size_t l = 0; l < conv_w.size(); ++l) {
      p.push_back(&conv_w[l]);
      p.push_back(&conv_b[l]);
    }
    p.push_back(&head_w);
    p.push_back(&head_b);
    return p;
  }
};

// Filters uniform on +-sqrt(6/fan_in), biases zero. Draw order is fixed
// (layers in order, filters before bias) so a seed pins the model bit-exactly.
inline LdeModel lde_init(const LdeConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  LdeModel m;
  m.config = config;
  const std::vector<std::size_t> ch = config.channels();
  std::size_t c_in = 2;
  for (std::size_t l = 0; l < ch.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(c_in * config.filter_size));
    DenseArray w({ch[l], c_in, config.filter_size});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
    m.conv_w.push_back(std::move(w));
    m.conv_b.emplace_back(Shape{ch[l]});
    c_in = ch[l];
  }
  const std::size_t k3 = 3 * config.mixture_count;
  const double bound = std::sqrt(6.0 / static_cast<double>(c_in));
  m.head_w = DenseArray({k3, c_in, 1});
  for (std::size_t i = 0; i < m.head_w.size(); ++i) m.head_w[i] = rng.uniform(-bound, bound);
  m.head_b = DenseArray({k3});
  return m;
}

// Mixture parameters for a batch, one [B x D x K] array per field. pi rows are
// kept in the log domain; sigma already includes the floor.
struct MdnBatch {
  ArrayPtr log_pi, mu, sigma;
  std::size_t batch() const { return log_pi->dim(0); }
  std::size_t dim() const { return log_pi->dim(1); }
  std::size_t k() const { return log_pi->dim(2); }
};

struct LdeGraph {
  Var log_pi, mu, sigma; // [B x D x K]
  std::vector<Var> params;
};

namespace detail {

// The network input: z shifted right by one position, plus a mask channel
// telling genuine values apart from the single left pad. Position 1 carries
// the pair (0,0); position i >= 2 carries (z_{i-1}, 1).
inline DenseArray lde_input(const DenseArray& z) {
  const std::size_t B = z.dim(0), D = z.dim(1);
  DenseArray in({B, 2, D});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 1; t < D; ++t) {
      in(b, 0, t) = z(b, t - 1);
      in(b, 1, t) = 1.0;
    }
  }
  return in;
}

}  // namespace detail

// Shared forward builder: records the graph when the tape is recording, and
// serves plain inference otherwise. Leaf order matches LdeModel::parameters().
inline LdeGraph lde_forward_graph(Tape& tape, const LdeModel& m, const DenseArray& z) {
  require_rank(z, 2, "lde_forward: z");
  if (z.dim(1) != m.config.latent_dim)
    throw DimensionError("lde_forward: z has " + std::to_string(z.dim(1)) +
                         " coordinates, model expects " +
                         std::to_string(m.config.latent_dim));
  require_finite(z, "lde_forward: z");
  const std::size_t K = m.config.mixture_count;
  const std::size_t s = m.config.filter_size;

  LdeGraph g;
  Var h = Tape::constant(detail::lde_input(z));
  std::size_t dilation = 1;
  for (std::size_t l = 0; l < m.conv_w.size(); ++l) {
    Var w = tape.leaf(m.conv_w[l]);
    Var b = tape.leaf(m.conv_b[l]);
    g.params.push_back(w);
    g.params.push_back(b);
    h = tape.leaky_relu(tape.causal_conv1d(h, w, b, dilation));
    dilation *= s;
  }
  Var hw = tape.leaf(m.head_w);
  Var hb = tape.leaf(m.head_b);
  g.params.push_back(hw);
  g.params.push_back(hb);
  Var raw = tape.causal_conv1d(h, hw, hb, 1); // [B x 3K x D]

  g.mu = tape.swap_last2(tape.slice_channels(raw, 0, K));
  g.sigma = tape.add_scalar(tape.exp_op(tape.swap_last2(tape.slice_channels(raw, K, 2 * K))),
                            m.config.sigma_floor);
  g.log_pi = tape.log_softmax(tape.swap_last2(tape.slice_channels(raw, 2 * K, 3 * K)));
  return g;
}

inline MdnBatch lde_forward(const LdeModel& m, const DenseArray& z) {
  Tape tape(false);
  LdeGraph g = lde_forward_graph(tape, m, z);
  return MdnBatch{g.log_pi.value, g.mu.value, g.sigma.value};
}

// log sum_k pi_k N(z; mu_k, sigma_k^2) via logsumexp over
// log pi_k - (z-mu_k)^2/(2 sigma_k^2) - log sigma_k - log(2 pi)/2.
inline double conditional_log_density(const double* log_pi, const double* mu,
                                      const double* sigma, std::size_t K, double z) {
  auto term = [&](std::size_t k) {
    const double d = (z - mu[k]) / sigma[k];
    return log_pi[k] - 0.5 * d * d - std::log(sigma[k]) - 0.5 * kLog2Pi;
  };
  double mx = term(0);
  for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, term(k));
  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) sum += std::exp(term(k) - mx);
  return mx + std::log(sum);
}

inline double conditional_log_density(const MdnBatch& p, std::size_t b, std::size_t i, double z) {
  const std::size_t K = p.k();
  const std::size_t off = (b * p.dim() + i) * K;
  return conditional_log_density(p.log_pi->ptr() + off, p.mu->ptr() + off, p.sigma->ptr() + off,
                                 K, z);
}

// Chain-rule log density per batch row: sum_i log p(z_i | z_<i).
inline DenseArray lde_log_density(const LdeModel& m, const DenseArray& z) {
  MdnBatch p = lde_forward(m, z);
  const std::size_t B = z.dim(0), D = z.dim(1);
  DenseArray out({B});
  for (std::size_t b = 0; b < B; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < D; ++i) acc += conditional_log_density(p, b, i, z(b, i));
    out[b] = acc;
  }
  return out;
}

// Training loss: the negative conditional log-densities averaged over both the
// batch and the D coordinates, as a differentiable scalar node.
inline Var lde_nll_loss(Tape& tape, const LdeModel& m, const DenseArray& batch,
                        std::vector<Var>* params_out = nullptr) {
  require_rank(batch, 2, "lde_nll_loss: batch");
  if (batch.dim(0) == 0) throw ParameterError("lde_nll_loss: empty batch");
  const std::size_t B = batch.dim(0), D = batch.dim(1), K = m.config.mixture_count;
  LdeGraph g = lde_forward_graph(tape, m, batch);
  if (params_out) *params_out = g.params;

  Var zk = tape.expand_last(Tape::constant(batch), K);      // [B x D x K]
  Var t = tape.div(tape.sub(zk, g.mu), g.sigma);
  Var log_norm = tape.add_scalar(
      tape.sub(tape.scale(tape.mul(t, t), -0.5), tape.log_op(g.sigma)), -0.5 * kLog2Pi);
  Var cond = tape.logsumexp(tape.add(g.log_pi, log_norm));  // [B x D]
  return tape.scale(tape.sum_all(cond), -1.0 / static_cast<double>(B * D));
}

inline double lde_nll_value(const LdeModel& m, const DenseArray& batch) {
  Tape tape(false);
  return lde_nll_loss(tape, m, batch).v()[0];
}

// Ancestral sampling: fill coordinate i from its conditional mixture given the
// coordinates drawn so far. Per-sample log densities accumulated on request
// use the exact parameters the draws came from.
inline DenseArray lde_sample(const LdeModel& m, std::size_t n, std::uint64_t seed,
                             std::vector<double>* log_density_out = nullptr) {
  if (n < 1) throw ParameterError("lde_sample: n must be >= 1");
  const std::size_t D = m.config.latent_dim, K = m.config.mixture_count;
  Rng rng(seed);
  DenseArray z({n, D});
  if (log_density_out) log_density_out->assign(n, 0.0);
  std::vector<double> w(K);
  for (std::size_t i = 0; i < D; ++i) {
    MdnBatch p = lde_forward(m, z);
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * D + i) * K;
      const double* lp = p.log_pi->ptr() + off;
      for (std::size_t k = 0; k < K; ++k) w[k] = std::exp(lp[k]);
      const std::size_t k = rng.categorical(w);
      const double mu = (*p.mu)[off + k];
      const double sigma = (*p.sigma)[off + k];
      z(b, i) = rng.normal(mu, sigma);
      if (log_density_out) (*log_density_out)[b] += conditional_log_density(p, b, i, z(b, i));
    }
  }
  return z;
}

}  // namespace lade
