#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "detour/dataset.hpp"
#include "detour/error.hpp"
#include "detour/mode.hpp"
#include "detour/network.hpp"

namespace detour {

// Detour distance implied by a stated detour time on a given mode.
inline double detour_distance(Mode mode, double detour_min,
                              const NetworkParams& net) {
  if (!(detour_min > 0.0)) {
    throw ArgumentError("detour_min must be positive, got " +
                        std::to_string(detour_min));
  }
  return net.speed_kmh[mode_index(mode)] * detour_min / 60.0;
}

// Fans a detour distance out to every mode's detour time, in minutes.
inline ModeArray alternative_detour_times(double distance_km,
                                          const NetworkParams& net) {
  if (distance_km < 0.0) throw ArgumentError("distance_km must be >= 0");
  ModeArray times;
  for (Mode m : kAllModes) {
    times[mode_index(m)] = distance_km / net.speed_kmh[mode_index(m)] * 60.0;
  }
  return times;
}

// Monetary cost of the detour. Active modes are free, PT charges one
// boarding tariff per detour, the car burns fuel over the detour distance.
inline double detour_cost(Mode mode, double distance_km,
                          const NetworkParams& net) {
  if (distance_km < 0.0) throw ArgumentError("distance_km must be >= 0");
  switch (mode) {
    case Mode::walking:
    case Mode::bike:
      return 0.0;
    case Mode::car:
      return distance_km * net.fuel_consumption_l_per_km *
             net.fuel_price_uah_per_l;
    case Mode::bus:
    case Mode::metro:
    case Mode::electric_ground_pt:
      return net.tariff_uah[mode_index(mode)];
  }
  return 0.0;
}

// Courier profit: remuneration minus detour cost. May be negative.
inline double profit(double remuneration_uah, double cost_uah) {
  return remuneration_uah - cost_uah;
}

// Reconstructed per-mode attributes for one observation. The detour
// distance is shared across modes: it is derived from the chosen mode's
// stated time and fanned out by travel speed.
struct DetourAttributes {
  double detour_distance_km = 0.0;
  ModeArray detour_time_min{};
  ModeArray detour_cost_uah{};
  ModeArray profit_uah{};
};

inline DetourAttributes compute_detour_attributes(const Observation& obs,
                                                  const NetworkParams& net) {
  DetourAttributes a;
  a.detour_distance_km =
      detour_distance(obs.chosen_mode, obs.stated_detour_min, net);
  a.detour_time_min = alternative_detour_times(a.detour_distance_km, net);
  // the chosen mode's time is the stated value, exactly
  a.detour_time_min[mode_index(obs.chosen_mode)] = obs.stated_detour_min;
  for (Mode m : kAllModes) {
    const int i = mode_index(m);
    a.detour_cost_uah[i] = detour_cost(m, a.detour_distance_km, net);
    a.profit_uah[i] = profit(obs.remuneration_uah, a.detour_cost_uah[i]);
  }
  return a;
}

// Attribute slots of the design matrix.
inline constexpr std::size_t kAttributeCount = 5;
inline constexpr std::array<std::string_view, kAttributeCount> kAttributeNames =
    {"const", "time", "cost", "profit", "income"};

inline int attribute_index(std::string_view name) {
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    if (kAttributeNames[i] == name) return static_cast<int>(i);
  }
  return -1;
}

// Per-observation, per-mode scaled attribute values plus an availability
// mask. Unavailable cells keep their computed values but are never read by
// the likelihood; the mask is the single source of truth.
struct DesignMatrix {
  std::size_t n_obs = 0;
  // flattened [obs][mode][attribute]
  std::vector<double> values;
  // flattened [obs][mode]
  std::vector<unsigned char> available;

  static DesignMatrix zeros(std::size_t n_obs) {
    DesignMatrix x;
    x.n_obs = n_obs;
    x.values.assign(n_obs * kModeCount * kAttributeCount, 0.0);
    x.available.assign(n_obs * kModeCount, 1);
    return x;
  }

  double& at(std::size_t obs, Mode m, int attr) {
    return values[(obs * kModeCount + mode_index(m)) * kAttributeCount + attr];
  }
  double at(std::size_t obs, Mode m, int attr) const {
    return values[(obs * kModeCount + mode_index(m)) * kAttributeCount + attr];
  }
  bool is_available(std::size_t obs, Mode m) const {
    return available[obs * kModeCount + mode_index(m)] != 0;
  }
  void set_available(std::size_t obs, Mode m, bool v) {
    available[obs * kModeCount + mode_index(m)] = v ? 1 : 0;
  }
  std::size_t choice_set_size(std::size_t obs) const {
    std::size_t n = 0;
    for (Mode m : kAllModes) n += is_available(obs, m) ? 1 : 0;
    return n;
  }
};

// Forward declaration; the full definition lives in model_spec.hpp.
struct ModelSpec;
void validate_spec_attributes(const ModelSpec& spec);

// Builds the scaled design matrix for the whole dataset: reconstructs the
// detour distance from the chosen mode, fans out times, costs and profits,
// divides by the scaling divisors and attaches the income column.
inline DesignMatrix build_design_matrix(const Dataset& d,
                                        const NetworkParams& net,
                                        const ScalingConfig& s,
                                        const ModelSpec& spec) {
  net.validate();
  s.validate();
  validate_spec_attributes(spec);
  DesignMatrix x = DesignMatrix::zeros(d.size());
  for (std::size_t q = 0; q < d.size(); ++q) {
    const Observation& o = d[q];
    const DetourAttributes a = compute_detour_attributes(o, net);
    for (Mode m : kAllModes) {
      const int i = mode_index(m);
      x.at(q, m, 0) = 1.0;
      x.at(q, m, 1) = a.detour_time_min[i] / s.detour_time_divisor;
      x.at(q, m, 2) = a.detour_cost_uah[i] / s.detour_cost_divisor;
      x.at(q, m, 3) = a.profit_uah[i] / s.profit_divisor;
      x.at(q, m, 4) = o.income_uah / s.income_divisor;
      x.set_available(q, m, d.available(q, m));
    }
  }
  return x;
}

// Raw (unscaled) attribute table written by the `synthesize` subcommand:
// one row per observation x mode.
inline std::string attribute_table_csv(const Dataset& d,
                                       const NetworkParams& net,
                                       const ScalingConfig& s) {
  net.validate();
  s.validate();
  std::string out =
      "id,mode,available,detour_min,detour_cost,profit,"
      "scaled_time,scaled_cost,scaled_profit,scaled_income\n";
  for (std::size_t q = 0; q < d.size(); ++q) {
    const Observation& o = d[q];
    const DetourAttributes a = compute_detour_attributes(o, net);
    for (Mode m : kAllModes) {
      const int i = mode_index(m);
      out += o.id;
      out += ',';
      out += mode_name(m);
      out += ',';
      out += d.available(q, m) ? "true" : "false";
      out += ',';
      out += format_number(a.detour_time_min[i]);
      out += ',';
      out += format_number(a.detour_cost_uah[i]);
      out += ',';
      out += format_number(a.profit_uah[i]);
      out += ',';
      out += format_number(a.detour_time_min[i] / s.detour_time_divisor);
      out += ',';
      out += format_number(a.detour_cost_uah[i] / s.detour_cost_divisor);
      out += ',';
      out += format_number(a.profit_uah[i] / s.profit_divisor);
      out += ',';
      out += format_number(o.income_uah / s.income_divisor);
      out += '\n';
    }
  }
  return out;
}

}  // namespace detour
