#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "detour/error.hpp"

namespace detour {

// Transport modes available to a courier. Tram and trolleybus are merged
// into one electric ground PT mode (equal tariffs, near-equal speeds).
// The enumerator value is the stable column index used by all matrices.
enum class Mode : int {
  walking = 0,
  bike = 1,
  car = 2,
  bus = 3,
  metro = 4,
  electric_ground_pt = 5,
};

inline constexpr std::size_t kModeCount = 6;

inline constexpr std::array<Mode, kModeCount> kAllModes = {
    Mode::walking, Mode::bike, Mode::car,
    Mode::bus,     Mode::metro, Mode::electric_ground_pt,
};

constexpr int mode_index(Mode m) { return static_cast<int>(m); }

constexpr std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::walking: return "walking";
    case Mode::bike: return "bike";
    case Mode::car: return "car";
    case Mode::bus: return "bus";
    case Mode::metro: return "metro";
    case Mode::electric_ground_pt: return "electric_ground_pt";
  }
  return "?";
}

// Upper-case name used in coefficient labels (ASC_BIKE, DT_WALKING, ...).
constexpr std::string_view mode_label(Mode m) {
  switch (m) {
    case Mode::walking: return "WALKING";
    case Mode::bike: return "BIKE";
    case Mode::car: return "CAR";
    case Mode::bus: return "BUS";
    case Mode::metro: return "METRO";
    case Mode::electric_ground_pt: return "ELECTRIC_GROUND_PT";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  for (Mode m : kAllModes) {
    if (s == mode_name(m)) return m;
  }
  throw ParseError("unknown mode: '" + std::string(s) + "'");
}

// Fixed-size per-mode value holders.
using ModeArray = std::array<double, kModeCount>;
using ModeMask = std::array<bool, kModeCount>;

}  // namespace detour
