#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "synthgrid/ingest/ingest.hpp"
#include "synthgrid/ingest/types.hpp"

namespace fixtures {

// PV-like days: a half-sine bump between 06:00 and 18:00 whose peak varies
// per day, plus Gaussian noise, floored at zero. Watts.
inline synthgrid::DailyProfileSet sinusoid_days(std::size_t n_days, std::uint64_t seed, double peak_w = 3000.0,
                                                double noise_w = 150.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_w);
  std::uniform_real_distribution<double> scale(0.6, 1.0);
  std::vector<double> v;
  std::vector<std::int64_t> days;
  v.reserve(n_days * synthgrid::kStepsPerDay);
  for (std::size_t d = 0; d < n_days; ++d) {
    const double amp = peak_w * scale(rng);
    for (std::size_t t = 0; t < synthgrid::kStepsPerDay; ++t) {
      const double phase = (static_cast<double>(t) - 24.0) / 48.0;
      const double base = (phase > 0.0 && phase < 1.0) ? amp * std::sin(std::numbers::pi * phase) : 0.0;
      v.push_back(std::max(0.0, base + noise(rng)));
    }
    days.push_back(19000 + static_cast<std::int64_t>(d));
  }
  return synthgrid::DailyProfileSet(synthgrid::Channel::kPv, std::move(v), std::move(days));
}

inline std::vector<double> uniform_values(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (double& x : out) x = u(rng);
  return out;
}

}  // namespace fixtures
