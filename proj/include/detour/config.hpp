#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "detour/csv.hpp"
#include "detour/error.hpp"
#include "detour/model_spec.hpp"
#include "detour/network.hpp"
#include "detour/optimize.hpp"

namespace detour {

// Everything a pipeline run needs. Defaults follow the reference network
// and scaling tables; the config file may override any of it.
struct RunConfig {
  NetworkParams network;
  ScalingConfig scaling;
  std::string model = "cost-time";  // preset name or spec file path
  bool mixture = false;
  OptimizerOptions optimizer;
  DrawConfig draws;
  int threads = 0;
  std::string out_dir = "out";
};

// Flat key-value configuration with [section] headers. Unknown keys are
// rejected so typos cannot silently fall back to defaults.
//
//   [network]
//   speed.car = 23
//   tariff.bus = 10
//   fuel_price = 27
//   fuel_consumption = 0.08
//   [scaling]
//   detour_time = 10
//   detour_cost = 10
//   profit = 100
//   income = 10000
//   [model]
//   model = cost-time | profit-time | <spec file>
//   mixture = true | false
//   [optimizer]
//   max_iterations = 500
//   tolerance = 1e-6
//   [draws]
//   count = 100
//   type = halton | random
//   seed = 42
inline RunConfig parse_config(const std::string& content,
                              const std::string& origin = "<config>") {
  RunConfig cfg;
  std::istringstream in(content);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    std::size_t last = line.find_last_not_of(" \t");
    line = line.substr(begin, last - begin + 1);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (section != "network" && section != "scaling" && section != "model" &&
          section != "optimizer" && section != "draws") {
        throw ConfigError("unknown section [" + section + "] at " + where);
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value at " + where);
    }
    auto trim = [](std::string s) {
      const std::size_t b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const std::size_t e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("expected key = value at " + where);
    }

    if (section == "network") {
      if (key.rfind("speed.", 0) == 0) {
        const Mode m = parse_mode(key.substr(6));
        cfg.network.speed_kmh[mode_index(m)] = parse_double(value, where);
      } else if (key.rfind("tariff.", 0) == 0) {
        const Mode m = parse_mode(key.substr(7));
        cfg.network.tariff_uah[mode_index(m)] = parse_double(value, where);
      } else if (key == "fuel_price") {
        cfg.network.fuel_price_uah_per_l = parse_double(value, where);
      } else if (key == "fuel_consumption") {
        cfg.network.fuel_consumption_l_per_km = parse_double(value, where);
      } else {
        throw ConfigError("unknown key '" + key + "' in [network] at " + where);
      }
    } else if (section == "scaling") {
      if (key == "detour_time") {
        cfg.scaling.detour_time_divisor = parse_double(value, where);
      } else if (key == "detour_cost") {
        cfg.scaling.detour_cost_divisor = parse_double(value, where);
      } else if (key == "profit") {
        cfg.scaling.profit_divisor = parse_double(value, where);
      } else if (key == "income") {
        cfg.scaling.income_divisor = parse_double(value, where);
      } else {
        throw ConfigError("unknown key '" + key + "' in [scaling] at " + where);
      }
    } else if (section == "model") {
      if (key == "model") {
        cfg.model = value;
      } else if (key == "mixture") {
        cfg.mixture = parse_bool(value, where);
      } else {
        throw ConfigError("unknown key '" + key + "' in [model] at " + where);
      }
    } else if (section == "optimizer") {
      if (key == "max_iterations") {
        cfg.optimizer.max_iterations =
            static_cast<int>(parse_double(value, where));
      } else if (key == "tolerance") {
        cfg.optimizer.gradient_tolerance = parse_double(value, where);
      } else {
        throw ConfigError("unknown key '" + key + "' in [optimizer] at " +
                          where);
      }
    } else if (section == "draws") {
      if (key == "count") {
        cfg.draws.count = static_cast<int>(parse_double(value, where));
      } else if (key == "type") {
        cfg.draws.type = parse_draw_type(value);
      } else if (key == "seed") {
        cfg.draws.seed = static_cast<std::uint64_t>(
            std::stoull(value));
      } else {
        throw ConfigError("unknown key '" + key + "' in [draws] at " + where);
      }
    } else {
      throw ConfigError("key '" + key + "' outside any section at " + where);
    }
  }
  cfg.network.validate();
  cfg.scaling.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  return parse_config(read_file(path), path);
}

// Resolves a model name: a preset id or a spec file on disk.
inline ModelSpec resolve_model(const std::string& name, bool mixture,
                               const DrawConfig& draws) {
  ModelSpec spec;
  if (name == "cost-time") {
    spec = cost_time_spec();
  } else if (name == "profit-time") {
    spec = profit_time_spec();
  } else {
    spec = load_model_spec(name);
  }
  if (mixture && spec.mixing.empty()) spec = with_time_mixing(spec);
  spec.draws = draws;
  return spec;
}

}  // namespace detour
