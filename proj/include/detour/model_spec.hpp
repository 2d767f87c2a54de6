#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "detour/csv.hpp"
#include "detour/error.hpp"
#include "detour/mode.hpp"
#include "detour/synthesis.hpp"

namespace detour {

// One linear utility term: a named coefficient applied to one attribute on
// a set of modes.
struct Term {
  std::string coefficient;
  std::string attribute;
  ModeMask modes{};
};

enum class DrawType { halton, pseudo_random };

inline DrawType parse_draw_type(const std::string& s) {
  if (s == "halton") return DrawType::halton;
  if (s == "random" || s == "pseudo_random") return DrawType::pseudo_random;
  throw ParseError("unknown draw type: '" + s + "'");
}

struct DrawConfig {
  int count = 100;
  DrawType type = DrawType::halton;
  std::uint64_t seed = 42;
};

// Normal mixing on one coefficient: mean is the base coefficient, the
// standard deviation is a companion sigma coefficient estimated alongside
// it (unconstrained; interpreted through |sigma|).
struct MixingSpec {
  std::string sigma_coefficient;
};

// Declarative utility specification. The base mode carries no constant and
// no income term; only utility differences are identified.
struct ModelSpec {
  std::string id;
  Mode base_mode = Mode::walking;
  std::vector<Term> terms;
  std::map<std::string, double> fixed;       // coefficient -> pinned value
  std::map<std::string, MixingSpec> mixing;  // coefficient -> sigma name
  DrawConfig draws;

  bool is_fixed(const std::string& coefficient) const {
    return fixed.count(coefficient) != 0;
  }

  // Free coefficients in declaration order, sigma coefficients appended in
  // the order their base terms appear. This is the parameter vector layout.
  std::vector<std::string> free_coefficients() const {
    std::vector<std::string> names;
    for (const Term& t : terms) {
      if (!is_fixed(t.coefficient)) names.push_back(t.coefficient);
    }
    for (const Term& t : terms) {
      auto it = mixing.find(t.coefficient);
      if (it != mixing.end()) names.push_back(it->second.sigma_coefficient);
    }
    return names;
  }

  void validate() const {
    std::set<std::string> seen;
    for (const Term& t : terms) {
      if (!seen.insert(t.coefficient).second) {
        throw SpecError("duplicate coefficient name '" + t.coefficient + "'");
      }
      if (attribute_index(t.attribute) < 0) {
        throw SpecError("unknown attribute '" + t.attribute +
                        "' for coefficient '" + t.coefficient + "'");
      }
      bool any = false;
      for (Mode m : kAllModes) any = any || t.modes[mode_index(m)];
      if (!any) {
        throw SpecError("coefficient '" + t.coefficient +
                        "' applies to no mode");
      }
      if ((t.attribute == "const" || t.attribute == "income") &&
          t.modes[mode_index(base_mode)]) {
        throw SpecError("coefficient '" + t.coefficient +
                        "' puts a " + t.attribute +
                        " term on the base mode; the base is normalized");
      }
    }
    for (const auto& [coef, mix] : mixing) {
      if (!seen.count(coef)) {
        throw SpecError("mixing refers to unknown coefficient '" + coef + "'");
      }
      if (seen.count(mix.sigma_coefficient)) {
        throw SpecError("sigma coefficient '" + mix.sigma_coefficient +
                        "' collides with a term name");
      }
    }
    for (const auto& [coef, value] : fixed) {
      if (!seen.count(coef)) {
        throw SpecError("fixed value refers to unknown coefficient '" + coef +
                        "'");
      }
      (void)value;
    }
    if (draws.count < 1) throw SpecError("draw count must be >= 1");
  }
};

inline void validate_spec_attributes(const ModelSpec& spec) {
  for (const Term& t : spec.terms) {
    if (attribute_index(t.attribute) < 0) {
      throw SpecError("unknown attribute '" + t.attribute +
                      "' for coefficient '" + t.coefficient + "'");
    }
  }
}

// Ordered coefficient name -> value map matching a spec's layout.
struct ParameterVector {
  std::vector<std::string> names;
  std::vector<double> values;

  std::size_t size() const { return names.size(); }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
  }

  double get(const std::string& name) const {
    const int i = index_of(name);
    if (i < 0) throw SpecError("missing coefficient '" + name + "'");
    return values[i];
  }

  static ParameterVector zeros(const ModelSpec& spec) {
    ParameterVector p;
    p.names = spec.free_coefficients();
    p.values.assign(p.names.size(), 0.0);
    return p;
  }

  static ParameterVector from_map(const ModelSpec& spec,
                                  const std::map<std::string, double>& vals) {
    ParameterVector p = zeros(spec);
    for (std::size_t i = 0; i < p.names.size(); ++i) {
      auto it = vals.find(p.names[i]);
      if (it == vals.end()) {
        throw SpecError("missing value for coefficient '" + p.names[i] + "'");
      }
      p.values[i] = it->second;
    }
    return p;
  }
};

namespace detail {

inline ModeMask single_mode(Mode m) {
  ModeMask mask{};
  mask[mode_index(m)] = true;
  return mask;
}

inline ModeMask all_modes() {
  ModeMask mask{};
  mask.fill(true);
  return mask;
}

// Table-layout ordering of the non-base modes in coefficient blocks.
inline const std::vector<Mode>& labeled_modes() {
  static const std::vector<Mode> order = {Mode::bike, Mode::bus, Mode::car,
                                          Mode::electric_ground_pt,
                                          Mode::metro};
  return order;
}

}  // namespace detail

// Cost-time specification: 5 ASCs, detour-cost terms on the fare-bearing
// modes, mode-specific detour-time terms, income terms on non-base modes.
inline ModelSpec cost_time_spec() {
  ModelSpec spec;
  spec.id = "cost-time";
  spec.base_mode = Mode::walking;
  for (Mode m : detail::labeled_modes()) {
    spec.terms.push_back({"ASC_" + std::string(mode_label(m)), "const",
                          detail::single_mode(m)});
  }
  for (Mode m : {Mode::bus, Mode::car, Mode::electric_ground_pt, Mode::metro}) {
    spec.terms.push_back(
        {"DC_" + std::string(mode_label(m)), "cost", detail::single_mode(m)});
  }
  for (Mode m : {Mode::bike, Mode::bus, Mode::car, Mode::electric_ground_pt,
                 Mode::metro, Mode::walking}) {
    spec.terms.push_back(
        {"DT_" + std::string(mode_label(m)), "time", detail::single_mode(m)});
  }
  for (Mode m : detail::labeled_modes()) {
    spec.terms.push_back({"INCOME_" + std::string(mode_label(m)), "income",
                          detail::single_mode(m)});
  }
  return spec;
}

// Profit-time specification: 5 ASCs, profit terms on all six modes,
// mode-specific detour-time terms, income terms on non-base modes.
inline ModelSpec profit_time_spec() {
  ModelSpec spec;
  spec.id = "profit-time";
  spec.base_mode = Mode::walking;
  for (Mode m : detail::labeled_modes()) {
    spec.terms.push_back({"ASC_" + std::string(mode_label(m)), "const",
                          detail::single_mode(m)});
  }
  for (Mode m : {Mode::bike, Mode::bus, Mode::car, Mode::electric_ground_pt,
                 Mode::metro, Mode::walking}) {
    spec.terms.push_back({"PROFIT_" + std::string(mode_label(m)), "profit",
                          detail::single_mode(m)});
  }
  for (Mode m : {Mode::bike, Mode::bus, Mode::car, Mode::electric_ground_pt,
                 Mode::metro, Mode::walking}) {
    spec.terms.push_back(
        {"DT_" + std::string(mode_label(m)), "time", detail::single_mode(m)});
  }
  for (Mode m : detail::labeled_modes()) {
    spec.terms.push_back({"INCOME_" + std::string(mode_label(m)), "income",
                          detail::single_mode(m)});
  }
  return spec;
}

// Adds normal mixing to every detour-time coefficient (the mixture variant
// of both presets).
inline ModelSpec with_time_mixing(ModelSpec spec) {
  for (const Term& t : spec.terms) {
    if (t.attribute != "time") continue;
    for (Mode m : kAllModes) {
      if (t.modes[mode_index(m)]) {
        spec.mixing[t.coefficient] = {"SIGMA_TIME_" +
                                      std::string(mode_label(m))};
        break;
      }
    }
  }
  return spec;
}

// Parses a model specification file. Line oriented:
//   base_mode <mode>
//   term <coefficient> <attribute> <mode>[,<mode>...]
//   fixed <coefficient> <value>
//   mix <coefficient> <sigma-coefficient>
// Blank lines and lines starting with '#' are ignored.
inline ModelSpec load_model_spec(const std::string& path) {
  ModelSpec spec;
  spec.id = path;
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    const std::string where = path + ":" + std::to_string(lineno);
    if (kind == "base_mode") {
      std::string m;
      ls >> m;
      spec.base_mode = parse_mode(m);
    } else if (kind == "term") {
      std::string coef, attr, modes;
      ls >> coef >> attr >> modes;
      if (coef.empty() || attr.empty() || modes.empty()) {
        throw ParseError("malformed term line at " + where);
      }
      Term t;
      t.coefficient = coef;
      t.attribute = attr;
      if (modes == "*") {
        t.modes = detail::all_modes();
      } else {
        std::istringstream ms(modes);
        std::string one;
        while (std::getline(ms, one, ',')) {
          t.modes[mode_index(parse_mode(one))] = true;
        }
      }
      spec.terms.push_back(std::move(t));
    } else if (kind == "fixed") {
      std::string coef, value;
      ls >> coef >> value;
      spec.fixed[coef] = parse_double(value, where);
    } else if (kind == "mix") {
      std::string coef, sigma;
      ls >> coef >> sigma;
      if (coef.empty() || sigma.empty()) {
        throw ParseError("malformed mix line at " + where);
      }
      spec.mixing[coef] = {sigma};
    } else {
      throw ParseError("unknown directive '" + kind + "' at " + where);
    }
  }
  spec.validate();
  return spec;
}

// Reads a "name value" per line parameter file (true values for `synth`).
inline std::map<std::string, double> load_parameter_file(
    const std::string& path) {
  std::map<std::string, double> out;
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name, value;
    ls >> name >> value;
    if (name.empty() || value.empty()) {
      throw ParseError("malformed parameter line at " + path + ":" +
                       std::to_string(lineno));
    }
    out[name] = parse_double(value, path + ":" + std::to_string(lineno));
  }
  return out;
}

}  // namespace detour
