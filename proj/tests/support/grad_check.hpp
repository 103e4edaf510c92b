#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "support/fixtures.hpp"
#include "synthgrid/deepgen/autograd.hpp"
#include "synthgrid/deepgen/models.hpp"

namespace oracles {

using namespace synthgrid;
using namespace synthgrid::deepgen;

inline Var random_const(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return constant(s, fixtures::uniform_values(s.size(), lo, hi, seed));
}

inline ArchConfig toy_arch() {
  ArchConfig a;
  a.seq_len = 6;
  a.latent_channels = 1;
  a.hidden_channels = 1;
  a.dilations = {1, 2};
  return a;
}

inline std::size_t count_params(const NamedParams& p) {
  std::size_t n = 0;
  for (const auto& [name, v] : p) n += v->value.size();
  return n;
}

// Largest relative error between backprop and central differences over
// every element of `params`.
inline double max_gradient_error(const std::function<Var()>& loss, const NamedParams& params, const NamedParams& all) {
  const auto all_vars = params_of(all);
  zero_grad(all_vars);
  backward(loss());
  double worst = 0.0;
  const double h = 1e-6;
  for (const auto& [name, p] : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + h;
      const double up = loss()->scalar();
      p->value[i] = keep - h;
      const double down = loss()->scalar();
      p->value[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad[i];
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
  }
  return worst;
}

}  // namespace oracles
