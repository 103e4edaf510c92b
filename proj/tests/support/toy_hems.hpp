#pragma once

#include <cmath>
#include <numbers>

#include "synthgrid/hems/hems.hpp"

namespace fixtures {

// Deterministic day: midday PV bump peaking at `pv_peak_kw`, a flat 1 kW base
// load with a 1.5 kW evening block (17:00-21:00), no EV.
inline synthgrid::hems::DayProfile toy_day(double pv_peak_kw = 6.0) {
  synthgrid::hems::DayProfile d;
  for (std::size_t t = 0; t < synthgrid::kStepsPerDay; ++t) {
    const double phase = (static_cast<double>(t) - 24.0) / 48.0;
    d.pv_kw[t] = (phase > 0.0 && phase < 1.0) ? pv_peak_kw * std::sin(std::numbers::pi * phase) : 0.0;
    d.load_kw[t] = 1.0 + ((t >= 68 && t < 84) ? 1.5 : 0.0);
    d.ev_kw[t] = 0.0;
  }
  return d;
}

// Tabular setup on which SOC (for C = 4, 8, 16 kWh) and time are resolved
// exactly, with far-sighted discounting and full-to-zero exploration decay.
inline synthgrid::hems::HemsConfig toy_config(double capacity_kwh = 16.0) {
  synthgrid::hems::HemsConfig c;
  c.capacity_kwh = capacity_kwh;
  c.gamma_d = 0.999;
  c.soc_bins = 16;
  c.time_bins = 96;
  c.epsilon = 1.0;
  c.epsilon_decay = true;
  c.epsilon_final = 0.0;
  return c;
}

}  // namespace fixtures
