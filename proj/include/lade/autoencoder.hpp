#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lade/adam.hpp"
#include "lade/array.hpp"
#include "lade/rng.hpp"
#include "lade/tape.hpp"

namespace lade {

enum class OutputActivation { Tanh, Sigmoid };

struct AeConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden; // encoder widths; decoder mirrors them
  std::size_t latent_dim = 0;      // D
  OutputActivation output_activation = OutputActivation::Tanh;
  double beta = 0.0;               // feature-distance weight

  void validate() const {
    if (input_dim < 1) throw ConfigError("ae: input_dim must be >= 1");
    if (latent_dim < 1) throw ConfigError("ae: latent_dim must be >= 1");
    if (latent_dim >= input_dim)
      throw ConfigError("ae: latent_dim must be smaller than input_dim (undercomplete)");
    if (hidden.empty()) throw ConfigError("ae: hidden widths must be nonempty");
    for (std::size_t h : hidden)
      if (h < 1) throw ConfigError("ae: hidden widths must be >= 1");
    if (beta < 0.0) throw ConfigError("ae: beta must be >= 0");
  }
};

struct AeModel {
  AeConfig config;
  std::vector<DenseArray> enc_w, enc_b; // input -> hidden... -> latent
  std::vector<DenseArray> dec_w, dec_b; // latent -> reversed hidden... -> input

  std::vector<DenseArray*> parameters() {
    std::vector<DenseArray*> p;
    for (std::size_t l = 0; l < enc_w.size(); ++l) {
      p.push_back(&enc_w[l]);
      p.push_back(&enc_b[l]);
    }
    for (std::size_t l = 0; l < dec_w.size(); ++l) {
      p.push_back(&dec_w[l]);
      p.push_back(&dec_b[l]);
    }
    return p;
  }
};

inline AeModel ae_init(const AeConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  AeModel m;
  m.config = config;
  auto make_stack = [&](const std::vector<std::size_t>& widths, std::vector<DenseArray>& ws,
                        std::vector<DenseArray>& bs) {
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const std::size_t in = widths[l], out = widths[l + 1];
      const double bound = std::sqrt(6.0 / static_cast<double>(in));
      DenseArray w({in, out});
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
      ws.push_back(std::move(w));
      bs.emplace_back(Shape{out});
    }
  };
  std::vector<std::size_t> enc{config.input_dim};
  enc.insert(enc.end(), config.hidden.begin(), config.hidden.end());
  enc.push_back(config.latent_dim);
  std::vector<std::size_t> dec{config.latent_dim};
  dec.insert(dec.end(), config.hidden.rbegin(), config.hidden.rend());
  dec.push_back(config.input_dim);
  make_stack(enc, m.enc_w, m.enc_b);
  make_stack(dec, m.dec_w, m.dec_b);
  return m;
}

// Leaky-ReLU hidden stack, linear latent layer. Leaf order matches
// AeModel::parameters() (encoder first).
inline Var encode_graph(Tape& tape, const AeModel& m, const Var& x,
                        std::vector<Var>* params_out = nullptr) {
  Var h = x;
  for (std::size_t l = 0; l < m.enc_w.size(); ++l) {
    Var w = tape.leaf(m.enc_w[l]);
    Var b = tape.leaf(m.enc_b[l]);
    if (params_out) {
      params_out->push_back(w);
      params_out->push_back(b);
    }
    h = tape.affine(h, w, b);
    if (l + 1 < m.enc_w.size()) h = tape.leaky_relu(h);
  }
  return h;
}

inline Var decode_graph(Tape& tape, const AeModel& m, const Var& z,
                        std::vector<Var>* params_out = nullptr) {
  Var h = z;
  for (std::size_t l = 0; l < m.dec_w.size(); ++l) {
    Var w = tape.leaf(m.dec_w[l]);
    Var b = tape.leaf(m.dec_b[l]);
    if (params_out) {
      params_out->push_back(w);
      params_out->push_back(b);
    }
    h = tape.affine(h, w, b);
    if (l + 1 < m.dec_w.size()) h = tape.leaky_relu(h);
  }
  return m.config.output_activation == OutputActivation::Tanh ? tape.tanh_op(h)
                                                              : tape.sigmoid(h);
}

inline DenseArray encode(const AeModel& m, const DenseArray& x) {
  require_rank(x, 2, "encode: x");
  if (x.dim(1) != m.config.input_dim)
    throw DimensionError("encode: row width " + std::to_string(x.dim(1)) + ", model expects " +
                         std::to_string(m.config.input_dim));
  Tape tape(false);
  return *encode_graph(tape, m, Tape::constant(x)).value;
}

inline DenseArray decode(const AeModel& m, const DenseArray& z) {
  require_rank(z, 2, "decode: z");
  if (z.dim(1) != m.config.latent_dim)
    throw DimensionError("decode: row width " + std::to_string(z.dim(1)) + ", model expects " +
                         std::to_string(m.config.latent_dim));
  Tape tape(false);
  return *decode_graph(tape, m, Tape::constant(z)).value;
}

// Incremental latent schedule: the usable prefix of the latent vector grows
// linearly from initial_dim to full_dim over ramp_end_step training steps.
struct MaskSchedule {
  std::size_t initial_dim = 1;  // d0
  std::size_t full_dim = 1;     // D
  std::size_t ramp_end_step = 1;
  std::size_t total_steps = 1;

  void validate() const {
    if (initial_dim < 1 || initial_dim > full_dim)
      throw ConfigError("mask schedule: need 1 <= initial_dim <= full_dim");
    if (ramp_end_step < 1) throw ConfigError("mask schedule: ramp_end_step must be >= 1");
    if (ramp_end_step > total_steps)
      throw ConfigError("mask schedule: ramp_end_step must be <= total_steps");
  }
};

// d(step) = min(D, d0 + floor((D - d0) * min(step, ramp) / ramp)). Exact
// integer arithmetic; non-decreasing, d(0) = d0, d(ramp) = D.
inline std::size_t effective_dim(const MaskSchedule& s, std::size_t step) {
  s.validate();
  const unsigned long long d0 = s.initial_dim, D = s.full_dim, ramp = s.ramp_end_step;
  const unsigned long long t = std::min<unsigned long long>(step, ramp);
  const unsigned long long d = d0 + (D - d0) * t / ramp;
  return static_cast<std::size_t>(std::min(d, D));
}

inline DenseArray latent_mask(std::size_t D, std::size_t d) {
  if (d < 1 || d > D) throw ParameterError("latent mask: need 1 <= d <= D");
  DenseArray m({D});
  for (std::size_t i = 0; i < d; ++i) m[i] = 1.0;
  return m;
}

// Zeroes components with index > d. The tape path multiplies by a constant 0/1
// vector, so adjoints at masked components are exactly zero.
inline DenseArray apply_latent_mask(const DenseArray& z, std::size_t d) {
  require_rank(z, 2, "apply_latent_mask: z");
  const std::size_t D = z.dim(1);
  DenseArray mask = latent_mask(D, d);
  DenseArray out(z.shape());
  for (std::size_t b = 0; b < z.dim(0); ++b)
    for (std::size_t i = 0; i < D; ++i) out(b, i) = z(b, i) * mask[i];
  return out;
}

inline Var apply_latent_mask(Tape& tape, const Var& z, std::size_t d) {
  return tape.rowwise_mul(z, Tape::constant(latent_mask(z.v().dim(1), d)));
}

// Optional data-space feature distance for the weighted reconstruction loss.
using FeatureDistance = std::function<Var(Tape&, const DenseArray& x, const Var& xhat)>;

// mean((x - xhat)^2) + beta * feature_distance(x, xhat). A positive beta
// without a hook is a configuration error, not a silent MSE fallback.
inline Var recon_loss(Tape& tape, const DenseArray& x, const Var& xhat, double beta = 0.0,
                      const FeatureDistance* hook = nullptr) {
  if (!x.same_shape(xhat.v()))
    throw DimensionError("recon_loss: x " + shape_str(x.shape()) + " vs xhat " +
                         shape_str(xhat.v().shape()));
  if (beta > 0.0 && hook == nullptr)
    throw ConfigError("recon_loss: beta > 0 requires a feature_distance hook");
  Var d = tape.sub(Tape::constant(x), xhat);
  Var mse = tape.scale(tape.sum_all(tape.mul(d, d)), 1.0 / static_cast<double>(x.size()));
  if (hook != nullptr && beta > 0.0) return tape.add(mse, tape.scale((*hook)(tape, x, xhat), beta));
  return mse;
}

// One optimization step: encode, mask by the schedule's current width, decode,
// reconstruct, backpropagate, Adam update. Returns the step's loss value;
// masked_grad_max_out receives the largest |adjoint| over masked latent slots
// (exactly 0 by construction, surfaced for verification).
inline double ae_train_step(AeModel& m, const DenseArray& batch, const MaskSchedule* schedule,
                            std::size_t step, AdamState& opt,
                            const FeatureDistance* hook = nullptr,
                            double* masked_grad_max_out = nullptr) {
  require_rank(batch, 2, "ae_train_step: batch");
  if (batch.dim(0) == 0) throw ParameterError("ae_train_step: empty batch");
  Tape tape;
  std::vector<Var> params;
  Var z = encode_graph(tape, m, Tape::constant(batch), &params);
  std::size_t d = m.config.latent_dim;
  Var zm = z;
  if (schedule != nullptr) {
    d = effective_dim(*schedule, step);
    zm = apply_latent_mask(tape, z, d);
  }
  Var xhat = decode_graph(tape, m, zm, &params);
  Var loss = recon_loss(tape, batch, xhat, m.config.beta, hook);
  tape.backward(loss);
  if (masked_grad_max_out) {
    const DenseArray& gz = tape.grad(z);
    double mx = 0.0;
    for (std::size_t b = 0; b < gz.dim(0); ++b)
      for (std::size_t i = d; i < gz.dim(1); ++i) mx = std::max(mx, std::fabs(gz(b, i)));
    *masked_grad_max_out = mx;
  }
  std::vector<DenseArray*> plist = m.parameters();
  std::vector<const DenseArray*> glist;
  glist.reserve(params.size());
  for (const Var& p : params) glist.push_back(&tape.grad(p));
  adam_step(opt, plist, glist);
  return loss.v()[0];
}

// Rows of exact convex combinations (1-alpha) z0 + alpha z1.
inline DenseArray interpolate_latents(const DenseArray& z0, const DenseArray& z1,
                                      const std::vector<double>& alphas) {
  require_rank(z0, 1, "interpolate_latents: z0");
  require_rank(z1, 1, "interpolate_latents: z1");
  if (!z0.same_shape(z1)) throw DimensionError("interpolate_latents: endpoint shapes differ");
  const std::size_t D = z0.dim(0);
  DenseArray out({alphas.size(), D});
  for (std::size_t r = 0; r < alphas.size(); ++r) {
    const double a = alphas[r];
    if (!(a >= 0.0 && a <= 1.0))
      throw ParameterError("interpolate_latents: alphas must lie in [0,1]");
    for (std::size_t i = 0; i < D; ++i) out(r, i) = (1.0 - a) * z0[i] + a * z1[i];
  }
  return out;
}

inline std::vector<double> alpha_grid_default() { return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}; }

}  // namespace lade
