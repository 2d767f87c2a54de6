#pragma once

#include <string>

#include "detour/error.hpp"
#include "detour/mode.hpp"

namespace detour {

// Network-level travel parameters: simulated door-to-door speeds (they
// already absorb access/egress walking and dwell time for PT), per-trip
// tariffs and car fuel economics.
struct NetworkParams {
  ModeArray speed_kmh = {4.0, 25.0, 23.0, 9.0, 13.0, 7.5};
  ModeArray tariff_uah = {0.0, 0.0, 0.0, 10.0, 8.0, 6.0};
  double fuel_price_uah_per_l = 27.0;
  double fuel_consumption_l_per_km = 0.08;

  void validate() const {
    for (Mode m : kAllModes) {
      if (!(speed_kmh[mode_index(m)] > 0.0)) {
        throw ArgumentError("speed must be positive for mode " +
                            std::string(mode_name(m)));
      }
      if (tariff_uah[mode_index(m)] < 0.0) {
        throw ArgumentError("tariff must be non-negative for mode " +
                            std::string(mode_name(m)));
      }
    }
    for (Mode m : {Mode::walking, Mode::bike, Mode::car}) {
      if (tariff_uah[mode_index(m)] != 0.0) {
        throw ArgumentError("tariff must be zero for mode " +
                            std::string(mode_name(m)));
      }
    }
    if (!(fuel_price_uah_per_l > 0.0)) {
      throw ArgumentError("fuel price must be positive");
    }
    if (!(fuel_consumption_l_per_km > 0.0)) {
      throw ArgumentError("fuel consumption must be positive");
    }
  }
};

// Divisors applied to raw attributes before estimation.
struct ScalingConfig {
  double detour_time_divisor = 10.0;
  double detour_cost_divisor = 10.0;
  double profit_divisor = 100.0;
  double income_divisor = 10000.0;

  void validate() const {
    if (!(detour_time_divisor > 0.0 && detour_cost_divisor > 0.0 &&
          profit_divisor > 0.0 && income_divisor > 0.0)) {
      throw ArgumentError("scaling divisors must be strictly positive");
    }
  }
};

}  // namespace detour
