#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lade/array.hpp"
#include "lade/rng.hpp"

namespace lade {

// Mixture of six equally weighted line components on the plane: three
// horizontal (uniform x, narrow Gaussian y) at y = 0, -3, +3 and three
// vertical (narrow Gaussian x, uniform y) at x = 0, +3, -3. The y = +3
// component has the interval (1.6, 2.6) cut out of its uniform axis.
struct ToySpec {
  double uniform_lo = -10.0;
  double uniform_hi = 10.0;
  double ridge_sigma = 0.1;
  double dropout_lo = 1.6;
  double dropout_hi = 2.6;

  // (bias_x, bias_y, horizontal?) per component; component 2 carries the dropout.
  struct Component {
    double bx, by;
    bool horizontal;
  };
  std::vector<Component> components() const {
    return {{0.0, 0.0, true},  {0.0, -3.0, true}, {0.0, 3.0, true},
            {0.0, 0.0, false}, {3.0, 0.0, false}, {-3.0, 0.0, false}};
  }
};

// Draw a component uniformly among the six, then the point. A draw from the
// dropout band of the y=+3 component is rejected and redrawn within that same
// component, so the component weights stay exactly 1/6 and the surviving
// uniform axis carries density 1/(span - band) -- the law toy_log_density
// evaluates. Sampling is deterministic per seed.
inline DenseArray toy_sample(const ToySpec& spec, std::size_t n, std::uint64_t seed,
                             std::vector<int>* component_out = nullptr) {
  if (n < 1) throw ParameterError("toy_sample: n must be >= 1");
  Rng rng(seed);
  const auto comps = spec.components();
  DenseArray out({n, 2});
  if (component_out) component_out->assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = rng.index(comps.size());
    const ToySpec::Component& comp = comps[c];
    double x, y;
    for (;;) {
      const double u = rng.uniform(spec.uniform_lo, spec.uniform_hi);
      const double g = rng.normal(0.0, spec.ridge_sigma);
      if (comp.horizontal) {
        x = u + comp.bx;
        y = g + comp.by;
      } else {
        x = g + comp.bx;
        y = u + comp.by;
      }
      const bool dropped = (c == 2) && x > spec.dropout_lo && x < spec.dropout_hi;
      if (!dropped) break;
    }
    out(r, 0) = x;
    out(r, 1) = y;
    if (component_out) (*component_out)[r] = static_cast<int>(c);
  }
  return out;
}

// Exact log density of the sampling law above. Every component contributes
// weight 1/6 times uniform(1/span) x N(0, ridge_sigma^2); the dropout
// component's uniform factor is 1/(span - band) on its reduced support and 0
// inside the band.
inline double toy_log_density(const ToySpec& spec, double x, double y) {
  const auto comps = spec.components();
  const double span = spec.uniform_hi - spec.uniform_lo;
  const double sig = spec.ridge_sigma;
  const double norm_coef = 1.0 / (sig * std::sqrt(2.0 * 3.14159265358979323846));
  double density = 0.0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const ToySpec::Component& comp = comps[c];
    const double u = comp.horizontal ? x - comp.bx : y - comp.by;
    const double g = comp.horizontal ? y - comp.by : x - comp.bx;
    double uniform_pdf;
    if (u < spec.uniform_lo || u > spec.uniform_hi) {
      uniform_pdf = 0.0;
    } else if (c == 2 && u > spec.dropout_lo && u < spec.dropout_hi) {
      uniform_pdf = 0.0;
    } else if (c == 2) {
      uniform_pdf = 1.0 / (span - (spec.dropout_hi - spec.dropout_lo));
    } else {
      uniform_pdf = 1.0 / span;
    }
    const double t = g / sig;
    density += (1.0 / 6.0) * uniform_pdf * norm_coef * std::exp(-0.5 * t * t);
  }
  return std::log(density);
}

}  // namespace lade
