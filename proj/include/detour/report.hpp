#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "detour/csv.hpp"
#include "detour/estimate.hpp"
#include "detour/mpe.hpp"

namespace detour {

// Two-sided normal p-value of a t statistic.
inline double two_sided_p(double t) {
  return std::erfc(std::abs(t) / std::sqrt(2.0));
}

// Significance stars: *** p < 0.005, ** p < 0.01, * p < 0.05.
inline std::string significance_stars(double t) {
  const double p = two_sided_p(t);
  if (p < 0.005) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

inline constexpr int kCoefficientDecimals = 3;
inline constexpr int kMpeDecimals = 2;

// Machine-readable estimation result, full precision.
inline std::string result_to_csv(const EstimationResult& r) {
  std::string out = "section,name,value,robust_se,robust_t\n";
  for (std::size_t j = 0; j < r.names.size(); ++j) {
    out += "coef," + r.names[j] + "," + format_number(r.values[j]) + "," +
           format_number(r.robust_se[j]) + "," + format_number(r.robust_t[j]) +
           "\n";
  }
  auto stat = [&out](const std::string& name, const std::string& value) {
    out += "stat," + name + "," + value + ",,\n";
  };
  stat("model", r.model_id);
  stat("sample_size", std::to_string(r.sample_size));
  stat("n_parameters", std::to_string(r.n_parameters));
  stat("ll_null", format_number(r.ll_null));
  stat("ll_final", format_number(r.ll_final));
  stat("adjusted_rho_sq", format_number(r.adjusted_rho_sq));
  stat("converged", r.converged ? "1" : "0");
  stat("iterations", std::to_string(r.iterations));
  stat("gradient_norm", format_number(r.gradient_norm_at_solution));
  stat("draws", std::to_string(r.draw_count));
  if (r.draw_count > 0) {
    stat("draw_type",
         r.draw_type == DrawType::halton ? "halton" : "pseudo_random");
    stat("draw_seed", std::to_string(r.draw_seed));
  }
  for (const std::string& w : r.warnings) {
    std::string safe = w;
    for (char& ch : safe) {
      if (ch == ',') ch = ';';
    }
    out += "warn," + safe + ",,,\n";
  }
  return out;
}

inline EstimationResult result_from_csv(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const int c_sec = csv.column("section");
  const int c_name = csv.column("name");
  const int c_val = csv.column("value");
  const int c_se = csv.column("robust_se");
  const int c_t = csv.column("robust_t");
  if (c_sec < 0 || c_name < 0 || c_val < 0 || c_se < 0 || c_t < 0) {
    throw SchemaError("not an estimation result file: " + path);
  }
  EstimationResult r;
  for (const auto& row : csv.rows) {
    const std::string& section = row[c_sec];
    if (section == "coef") {
      r.names.push_back(row[c_name]);
      r.values.push_back(parse_double(row[c_val], path));
      r.robust_se.push_back(parse_double(row[c_se], path));
      r.robust_t.push_back(parse_double(row[c_t], path));
    } else if (section == "stat") {
      const std::string& name = row[c_name];
      const std::string& value = row[c_val];
      if (name == "model") r.model_id = value;
      else if (name == "sample_size") r.sample_size = std::stoi(value);
      else if (name == "n_parameters") r.n_parameters = std::stoi(value);
      else if (name == "ll_null") r.ll_null = parse_double(value, path);
      else if (name == "ll_final") r.ll_final = parse_double(value, path);
      else if (name == "adjusted_rho_sq")
        r.adjusted_rho_sq = parse_double(value, path);
      else if (name == "converged") r.converged = value == "1";
      else if (name == "iterations") r.iterations = std::stoi(value);
      else if (name == "gradient_norm")
        r.gradient_norm_at_solution = parse_double(value, path);
      else if (name == "draws") r.draw_count = std::stoi(value);
      else if (name == "draw_type") r.draw_type = parse_draw_type(value);
      else if (name == "draw_seed")
        r.draw_seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (section == "warn") {
      r.warnings.push_back(row[c_name]);
    }
  }
  return r;
}

// Fixed-width coefficient table in the journal layout: value, robust
// standard error, robust t statistic, significance stars.
inline std::string result_to_text(const EstimationResult& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "Model: %s\n", r.model_id.c_str());
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-28s %12s %14s %12s %s\n", "coefficient",
                "value", "rob. st. error", "rob. t-test", "");
  out += buf;
  for (std::size_t j = 0; j < r.names.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%-28s %12s %14s %12s %s\n",
                  r.names[j].c_str(),
                  format_fixed(r.values[j], kCoefficientDecimals).c_str(),
                  format_fixed(r.robust_se[j], kCoefficientDecimals).c_str(),
                  format_fixed(r.robust_t[j], kCoefficientDecimals).c_str(),
                  significance_stars(r.robust_t[j]).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "Number of parameters    %d\n",
                r.n_parameters);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Sample size             %d\n",
                r.sample_size);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Null log-likelihood     %.3f\n", r.ll_null);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Final log-likelihood    %.3f\n",
                r.ll_final);
  out += buf;
  std::snprintf(buf, sizeof(buf), "Adjusted rho-square     %.3f\n",
                r.adjusted_rho_sq);
  out += buf;
  if (r.draw_count > 0) {
    std::snprintf(buf, sizeof(buf), "Number of draws         %d (%s)\n",
                  r.draw_count,
                  r.draw_type == DrawType::halton ? "halton" : "pseudo_random");
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "Converged               %s (%d iterations)\n",
                r.converged ? "yes" : "no", r.iterations);
  out += buf;
  for (const std::string& w : r.warnings) {
    out += "note: " + w + "\n";
  }
  out += "significance: *** p < 0.005, ** p < 0.01, * p < 0.05\n";
  return out;
}

inline std::string mpe_table_to_text(const MpeTable& t) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "Marginal probability effects, %% (model: %s, n=%d)\n",
                t.model_id.c_str(), t.sample_size);
  out += buf;
  if (t.rows.empty()) return out;
  std::vector<double> levels = t.levels;
  if (levels.empty()) {
    for (const MpeRow& row : t.rows) {
      bool seen = false;
      for (double l : levels) seen = seen || l == row.percent;
      if (!seen) levels.push_back(row.percent);
    }
  }
  std::snprintf(buf, sizeof(buf), "%-12s %-20s", "attribute", "mode");
  out += buf;
  for (double l : levels) {
    std::snprintf(buf, sizeof(buf), " %+8.0f%%", l);
    out += buf;
  }
  out += '\n';
  // rows arrive grouped by (attribute, mode); print one line per group
  std::size_t i = 0;
  while (i < t.rows.size()) {
    const std::string attribute = t.rows[i].attribute;
    const Mode mode = t.rows[i].mode;
    std::snprintf(buf, sizeof(buf), "%-12s %-20s", attribute.c_str(),
                  std::string(mode_name(mode)).c_str());
    out += buf;
    for (double l : levels) {
      double value = 0.0;
      bool found = false;
      for (std::size_t j = i; j < t.rows.size(); ++j) {
        if (t.rows[j].attribute == attribute && t.rows[j].mode == mode &&
            t.rows[j].percent == l) {
          value = t.rows[j].mpe_pct;
          found = true;
          break;
        }
      }
      if (found) {
        std::snprintf(buf, sizeof(buf), " %9s",
                      format_fixed(value, kMpeDecimals).c_str());
      } else {
        std::snprintf(buf, sizeof(buf), " %9s", "-");
      }
      out += buf;
    }
    out += '\n';
    while (i < t.rows.size() && t.rows[i].attribute == attribute &&
           t.rows[i].mode == mode) {
      ++i;
    }
  }
  return out;
}

// Human-readable report plus a CSV twin carrying the same numbers at the
// same printed precision.
struct RenderedReport {
  std::string text;
  std::string csv;
};

inline RenderedReport render_report(
    const std::vector<EstimationResult>& results,
    const std::vector<MpeTable>& mpe_tables) {
  if (results.empty()) {
    throw ArgumentError("render_report: need at least one result");
  }
  RenderedReport out;
  out.csv =
      "block,model,name,mode,percent,value,robust_se,robust_t,stars\n";
  for (const EstimationResult& r : results) {
    out.text += result_to_text(r);
    out.text += '\n';
    for (std::size_t j = 0; j < r.names.size(); ++j) {
      out.csv += "coef," + r.model_id + "," + r.names[j] + ",,," +
                 format_fixed(r.values[j], kCoefficientDecimals) + "," +
                 format_fixed(r.robust_se[j], kCoefficientDecimals) + "," +
                 format_fixed(r.robust_t[j], kCoefficientDecimals) + "," +
                 significance_stars(r.robust_t[j]) + "\n";
    }
    out.csv += "stat," + r.model_id + ",ll_null,,," +
               format_fixed(r.ll_null, kCoefficientDecimals) + ",,,\n";
    out.csv += "stat," + r.model_id + ",ll_final,,," +
               format_fixed(r.ll_final, kCoefficientDecimals) + ",,,\n";
    out.csv += "stat," + r.model_id + ",adjusted_rho_sq,,," +
               format_fixed(r.adjusted_rho_sq, kCoefficientDecimals) + ",,,\n";
  }
  for (const MpeTable& t : mpe_tables) {
    out.text += mpe_table_to_text(t);
    out.text += '\n';
    for (const MpeRow& row : t.rows) {
      out.csv += "mpe," + t.model_id + "," + row.attribute + "," +
                 std::string(mode_name(row.mode)) + "," +
                 format_number(row.percent) + "," +
                 format_fixed(row.mpe_pct, kMpeDecimals) + ",,,\n";
    }
  }
  return out;
}

}  // namespace detour
