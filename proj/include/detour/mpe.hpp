#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "detour/estimate.hpp"
#include "detour/mixed.hpp"
#include "detour/mnl.hpp"
#include "detour/synthesis.hpp"

namespace detour {

inline const std::vector<double>& default_perturbation_levels() {
  static const std::vector<double> levels = {-10.0, -5.0, -1.0,
                                             1.0,   5.0,  10.0};
  return levels;
}

// Copy of the design matrix with one attribute scaled by (1 + percent/100)
// in one mode's cells only; everything else untouched.
inline DesignMatrix perturb(const DesignMatrix& x, const std::string& attribute,
                            Mode mode, double percent) {
  const int attr = attribute_index(attribute);
  if (attr < 0) throw SpecError("unknown attribute '" + attribute + "'");
  if (!(percent > -100.0)) {
    throw ArgumentError("perturbation percent must exceed -100");
  }
  DesignMatrix out = x;
  if (percent == 0.0) return out;
  const double factor = 1.0 + percent / 100.0;
  for (std::size_t q = 0; q < x.n_obs; ++q) {
    out.at(q, mode, attr) *= factor;
  }
  return out;
}

namespace detail {

// Choice probabilities under the fitted model: plain logit, or the
// draw-averaged mixture when the spec carries mixing.
class ProbabilityEvaluator {
 public:
  ProbabilityEvaluator(const EstimationResult& result, const ModelSpec& spec)
      : cs_(compile_spec(spec)), theta_(result.values) {
    if (cs_.names != result.names) {
      throw SpecError("estimation result does not match the model spec");
    }
    if (!spec.mixing.empty()) {
      mixed_ = true;
      draw_count_ = result.draw_count > 0 ? result.draw_count
                                          : spec.draws.count;
      draw_type_ = result.draw_count > 0 ? result.draw_type : spec.draws.type;
      draw_seed_ = result.draw_count > 0 ? result.draw_seed : spec.draws.seed;
    }
  }

  void prepare(std::size_t n_obs) {
    if (mixed_ && draws_.n_obs != n_obs) {
      draws_ = make_draws(n_obs, static_cast<std::size_t>(draw_count_),
                          cs_.mixed.size(), draw_type_, draw_seed_);
    }
  }

  ModeArray probabilities(const DesignMatrix& x, std::size_t obs) const {
    if (mixed_) return simulated_probability(x, obs, theta_, cs_, draws_);
    ModeMask avail{};
    for (Mode m : kAllModes) avail[mode_index(m)] = x.is_available(obs, m);
    const ModeArray v = utilities_compiled(x, obs, theta_, cs_);
    return choice_probabilities(v, avail);
  }

 private:
  CompiledSpec cs_;
  Vector theta_;
  bool mixed_ = false;
  int draw_count_ = 0;
  DrawType draw_type_ = DrawType::halton;
  std::uint64_t draw_seed_ = 0;
  DrawTensor draws_;
};

}  // namespace detail

// Marginal probability effect, in percentage points: the average change of
// the mode's choice probability when its attribute is scaled by the given
// percentage. Observations without the mode in their choice set are
// excluded from the average.
inline double mpe(const Dataset& d, const DesignMatrix& x,
                  const EstimationResult& result, const ModelSpec& spec,
                  const std::string& attribute, Mode mode, double percent) {
  detail::ProbabilityEvaluator eval(result, spec);
  eval.prepare(x.n_obs);
  const DesignMatrix xp = perturb(x, attribute, mode, percent);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t q = 0; q < x.n_obs; ++q) {
    if (!x.is_available(q, mode)) continue;
    const ModeArray p0 = eval.probabilities(x, q);
    const ModeArray p1 = eval.probabilities(xp, q);
    sum += p1[mode_index(mode)] - p0[mode_index(mode)];
    ++n;
  }
  if (n == 0) {
    throw ArgumentError("mpe: mode " + std::string(mode_name(mode)) +
                        " is available for zero observations");
  }
  (void)d;
  return 100.0 * sum / static_cast<double>(n);
}

struct MpeRow {
  std::string attribute;
  Mode mode = Mode::walking;
  double percent = 0.0;
  double mpe_pct = 0.0;
};

struct MpeTable {
  std::string model_id;
  int sample_size = 0;
  std::vector<double> levels;
  std::vector<MpeRow> rows;
};

// Full grid: requested attributes x modes in the attribute's coefficient
// scope x perturbation levels.
inline MpeTable mpe_table(const Dataset& d, const DesignMatrix& x,
                          const EstimationResult& result,
                          const ModelSpec& spec,
                          const std::vector<std::string>& attributes,
                          const std::vector<double>& levels =
                              default_perturbation_levels()) {
  MpeTable table;
  table.model_id = result.model_id;
  table.sample_size = result.sample_size;
  table.levels = levels;
  for (const std::string& attribute : attributes) {
    if (attribute_index(attribute) < 0) {
      throw SpecError("unknown attribute '" + attribute + "'");
    }
    ModeMask applicable{};
    for (const Term& t : spec.terms) {
      if (t.attribute != attribute) continue;
      for (Mode m : kAllModes) {
        if (t.modes[mode_index(m)]) applicable[mode_index(m)] = true;
      }
    }
    for (Mode m : kAllModes) {
      if (!applicable[mode_index(m)]) continue;
      for (double level : levels) {
        MpeRow row;
        row.attribute = attribute;
        row.mode = m;
        row.percent = level;
        row.mpe_pct = mpe(d, x, result, spec, attribute, m, level);
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

inline std::string mpe_table_to_csv(const MpeTable& table) {
  std::string out = "model,attribute,mode,percent,mpe_pct\n";
  for (const MpeRow& row : table.rows) {
    out += table.model_id + "," + row.attribute + "," +
           std::string(mode_name(row.mode)) + "," +
           format_number(row.percent) + "," + format_fixed(row.mpe_pct, 2) +
           "\n";
  }
  return out;
}

inline MpeTable mpe_table_from_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  MpeTable table;
  const int c_model = csv.column("model");
  const int c_attr = csv.column("attribute");
  const int c_mode = csv.column("mode");
  const int c_pct = csv.column("percent");
  const int c_mpe = csv.column("mpe_pct");
  if (c_model < 0 || c_attr < 0 || c_mode < 0 || c_pct < 0 || c_mpe < 0) {
    throw SchemaError("not an MPE table: " + path);
  }
  for (const auto& row : csv.rows) {
    MpeRow r;
    table.model_id = row[c_model];
    r.attribute = row[c_attr];
    r.mode = parse_mode(row[c_mode]);
    r.percent = parse_double(row[c_pct], path);
    r.mpe_pct = parse_double(row[c_mpe], path);
    table.rows.push_back(r);
  }
  return table;
}

}  // namespace detour
