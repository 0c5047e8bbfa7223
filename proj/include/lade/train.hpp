#pragma once

#include <cstdint>
#include <vector>

#include "lade/adam.hpp"
#include "lade/autoencoder.hpp"
#include "lade/dataset.hpp"
#include "lade/lde.hpp"
#include "lade/tape.hpp"

namespace lade {

// Minibatch training drivers. Both return the per-step loss trace; everything
// stochastic (shuffling only) flows from the given seed.

inline std::vector<double> ae_fit(AeModel& m, const DenseArray& train, const MaskSchedule* sched,
                                  std::size_t steps, std::size_t batch_size, double alpha,
                                  std::uint64_t seed, const FeatureDistance* hook = nullptr) {
  std::vector<DenseArray*> params = m.parameters();
  AdamState opt = adam_init(params, alpha);
  BatchIter iter(train, batch_size, derive_seed(seed, "ae-shuffle"));
  std::vector<double> losses;
  losses.reserve(steps);
  for (std::size_t step = 0; step < steps; ++step)
    losses.push_back(ae_train_step(m, iter.next(), sched, step, opt, hook));
  return losses;
}

inline std::vector<double> lde_fit(LdeModel& m, const DenseArray& train, std::size_t steps,
                                   std::size_t batch_size, double alpha, std::uint64_t seed) {
  std::vector<DenseArray*> params = m.parameters();
  AdamState opt = adam_init(params, alpha);
  BatchIter iter(train, batch_size, derive_seed(seed, "lde-shuffle"));
  std::vector<double> losses;
  losses.reserve(steps);
  for (std::size_t step = 0; step < steps; ++step) {
    Tape tape;
    std::vector<Var> leaves;
    Var loss = lde_nll_loss(tape, m, iter.next(), &leaves);
    tape.backward(loss);
    std::vector<const DenseArray*> grads;
    grads.reserve(leaves.size());
    for (const Var& v : leaves) grads.push_back(&tape.grad(v));
    adam_step(opt, params, grads);
    losses.push_back(loss.v()[0]);
  }
  return losses;
}

}  // namespace lade
