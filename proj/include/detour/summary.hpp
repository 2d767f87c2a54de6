#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detour/csv.hpp"
#include "detour/dataset.hpp"

namespace detour {

// Descriptive statistics of stated detour times within one mode x group cell.
struct DetourStats {
  std::size_t count = 0;
  double share_pct = 0.0;  // share of the group subsample
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single observation
  double min = 0.0;
  double max = 0.0;
};

// Five-number summary of expected remuneration (box-and-whisker shape).
struct RemunerationQuartiles {
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct BreakdownRow {
  std::size_t count = 0;
  double pct = 0.0;
};

// One summary group: the whole sample or one gender.
struct GroupSummary {
  std::optional<Gender> gender;  // absent = pooled
  std::size_t group_size = 0;
  // present only for non-empty cells
  std::map<Mode, DetourStats> detour_by_mode;
  std::map<Mode, RemunerationQuartiles> remuneration_by_mode;
  std::map<TripChain, BreakdownRow> trip_chain;
  std::map<Frequency, BreakdownRow> frequency;
  // mode-based breakdowns, keyed (mode, category); empty cells absent
  std::map<std::pair<Mode, TripChain>, BreakdownRow> trip_chain_by_mode;
  std::map<std::pair<Mode, Frequency>, BreakdownRow> frequency_by_mode;
};

struct SummaryReport {
  bool by_gender = true;
  std::size_t sample_size = 0;
  std::vector<GroupSummary> groups;
};

namespace detail {

// Sorting before reduction makes every statistic invariant under
// permutations of the input rows, bit for bit.
inline double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Linear-interpolation quantile on a sorted sample (R type 7).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted[0];
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline GroupSummary summarize_group(const Dataset& d,
                                    std::optional<Gender> gender) {
  GroupSummary g;
  g.gender = gender;

  std::array<std::vector<double>, kModeCount> detours;
  std::array<std::vector<double>, kModeCount> remunerations;
  std::array<std::size_t, kTripChainCount> chain_counts{};
  std::array<std::size_t, kFrequencyCount> freq_counts{};
  std::array<std::array<std::size_t, kTripChainCount>, kModeCount>
      chain_by_mode{};
  std::array<std::array<std::size_t, kFrequencyCount>, kModeCount>
      freq_by_mode{};

  for (const Observation& o : d.observations()) {
    if (gender && o.gender != *gender) continue;
    ++g.group_size;
    const int m = mode_index(o.chosen_mode);
    detours[m].push_back(o.stated_detour_min);
    remunerations[m].push_back(o.remuneration_uah);
    ++chain_counts[static_cast<int>(o.trip_chain)];
    ++freq_counts[static_cast<int>(o.frequency)];
    ++chain_by_mode[m][static_cast<int>(o.trip_chain)];
    ++freq_by_mode[m][static_cast<int>(o.frequency)];
  }
  if (g.group_size == 0) return g;

  for (Mode m : kAllModes) {
    const int i = mode_index(m);
    if (detours[i].empty()) continue;  // empty cell stays absent

    std::vector<double> v = detours[i];
    std::sort(v.begin(), v.end());
    DetourStats st;
    st.count = v.size();
    st.share_pct = 100.0 * static_cast<double>(v.size()) /
                   static_cast<double>(g.group_size);
    st.mean = sorted_sum(v) / static_cast<double>(v.size());
    if (v.size() > 1) {
      std::vector<double> sq;
      sq.reserve(v.size());
      for (double x : v) sq.push_back((x - st.mean) * (x - st.mean));
      st.sd = std::sqrt(sorted_sum(sq) / static_cast<double>(v.size() - 1));
    }
    st.min = v.front();
    st.max = v.back();
    g.detour_by_mode[m] = st;

    std::vector<double> r = remunerations[i];
    std::sort(r.begin(), r.end());
    RemunerationQuartiles rq;
    rq.count = r.size();
    rq.min = r.front();
    rq.q1 = quantile_sorted(r, 0.25);
    rq.median = quantile_sorted(r, 0.5);
    rq.q3 = quantile_sorted(r, 0.75);
    rq.max = r.back();
    g.remuneration_by_mode[m] = rq;
  }

  for (int c = 0; c < static_cast<int>(kTripChainCount); ++c) {
    if (chain_counts[c] == 0) continue;
    g.trip_chain[static_cast<TripChain>(c)] = {
        chain_counts[c], 100.0 * static_cast<double>(chain_counts[c]) /
                             static_cast<double>(g.group_size)};
  }
  for (int f = 0; f < static_cast<int>(kFrequencyCount); ++f) {
    if (freq_counts[f] == 0) continue;
    g.frequency[static_cast<Frequency>(f)] = {
        freq_counts[f], 100.0 * static_cast<double>(freq_counts[f]) /
                            static_cast<double>(g.group_size)};
  }
  for (Mode m : kAllModes) {
    const int i = mode_index(m);
    std::size_t mode_total = 0;
    for (std::size_t c : chain_by_mode[i]) mode_total += c;
    if (mode_total == 0) continue;
    for (int c = 0; c < static_cast<int>(kTripChainCount); ++c) {
      if (chain_by_mode[i][c] == 0) continue;
      g.trip_chain_by_mode[{m, static_cast<TripChain>(c)}] = {
          chain_by_mode[i][c], 100.0 * static_cast<double>(chain_by_mode[i][c]) /
                                   static_cast<double>(mode_total)};
    }
    for (int f = 0; f < static_cast<int>(kFrequencyCount); ++f) {
      if (freq_by_mode[i][f] == 0) continue;
      g.frequency_by_mode[{m, static_cast<Frequency>(f)}] = {
          freq_by_mode[i][f], 100.0 * static_cast<double>(freq_by_mode[i][f]) /
                                  static_cast<double>(mode_total)};
    }
  }
  return g;
}

}  // namespace detail

// Descriptive summary of a dataset: per mode (x gender) detour statistics,
// remuneration quartiles, trip-chain and frequency breakdowns.
inline SummaryReport summarize(const Dataset& d, bool by_gender = true) {
  if (d.size() == 0) throw ArgumentError("summarize: empty dataset");
  SummaryReport rep;
  rep.by_gender = by_gender;
  rep.sample_size = d.size();
  if (by_gender) {
    rep.groups.push_back(detail::summarize_group(d, Gender::female));
    rep.groups.push_back(detail::summarize_group(d, Gender::male));
  } else {
    rep.groups.push_back(detail::summarize_group(d, std::nullopt));
  }
  return rep;
}

inline std::string summary_to_csv(const SummaryReport& rep) {
  std::string out = "section,group,mode,category,count,pct,mean,sd,min,max\n";
  auto group_name = [](const GroupSummary& g) -> std::string {
    return g.gender ? std::string(gender_name(*g.gender)) : "all";
  };
  for (const GroupSummary& g : rep.groups) {
    const std::string gn = group_name(g);
    for (const auto& [m, st] : g.detour_by_mode) {
      out += "detour_min," + gn + "," + std::string(mode_name(m)) + ",," +
             std::to_string(st.count) + "," + format_fixed(st.share_pct, 2) +
             "," + format_fixed(st.mean, 2) + "," + format_fixed(st.sd, 2) +
             "," + format_number(st.min) + "," + format_number(st.max) + "\n";
    }
    for (const auto& [m, rq] : g.remuneration_by_mode) {
      out += "remuneration_uah," + gn + "," + std::string(mode_name(m)) +
             ",quartiles," + std::to_string(rq.count) + ",," +
             format_fixed(rq.q1, 2) + "," + format_fixed(rq.median, 2) + "," +
             format_number(rq.min) + "," + format_number(rq.max) + "\n";
    }
    for (const auto& [c, row] : g.trip_chain) {
      out += "trip_chain," + gn + ",," + std::string(trip_chain_name(c)) + "," +
             std::to_string(row.count) + "," + format_fixed(row.pct, 2) +
             ",,,,\n";
    }
    for (const auto& [f, row] : g.frequency) {
      out += "frequency," + gn + ",," + std::string(frequency_name(f)) + "," +
             std::to_string(row.count) + "," + format_fixed(row.pct, 2) +
             ",,,,\n";
    }
    for (const auto& [key, row] : g.trip_chain_by_mode) {
      out += "trip_chain_by_mode," + gn + "," +
             std::string(mode_name(key.first)) + "," +
             std::string(trip_chain_name(key.second)) + "," +
             std::to_string(row.count) + "," + format_fixed(row.pct, 2) +
             ",,,,\n";
    }
    for (const auto& [key, row] : g.frequency_by_mode) {
      out += "frequency_by_mode," + gn + "," +
             std::string(mode_name(key.first)) + "," +
             std::string(frequency_name(key.second)) + "," +
             std::to_string(row.count) + "," + format_fixed(row.pct, 2) +
             ",,,,\n";
    }
  }
  return out;
}

inline std::string summary_to_text(const SummaryReport& rep) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "Sample size: %zu\n\n", rep.sample_size);
  out += buf;
  for (const GroupSummary& g : rep.groups) {
    const std::string gn =
        g.gender ? std::string(gender_name(*g.gender)) : "all";
    std::snprintf(buf, sizeof(buf), "== Group: %s (n=%zu) ==\n", gn.c_str(),
                  g.group_size);
    out += buf;
    out +=
        "  mode                 count  share%   mean     sd    min    max\n";
    for (const auto& [m, st] : g.detour_by_mode) {
      std::snprintf(buf, sizeof(buf),
                    "  %-20s %5zu  %6.2f  %5.1f  %5.2f  %5g  %5g\n",
                    std::string(mode_name(m)).c_str(), st.count, st.share_pct,
                    st.mean, st.sd, st.min, st.max);
      out += buf;
    }
    out += "  remuneration quartiles (min/q1/median/q3/max):\n";
    for (const auto& [m, rq] : g.remuneration_by_mode) {
      std::snprintf(buf, sizeof(buf), "  %-20s %5g %5.1f %5.1f %5.1f %5g\n",
                    std::string(mode_name(m)).c_str(), rq.min, rq.q1, rq.median,
                    rq.q3, rq.max);
      out += buf;
    }
    out += "  trip chains:";
    for (const auto& [c, row] : g.trip_chain) {
      std::snprintf(buf, sizeof(buf), "  %s %zu (%.2f%%)",
                    std::string(trip_chain_name(c)).c_str(), row.count,
                    row.pct);
      out += buf;
    }
    out += "\n  frequency:";
    for (const auto& [f, row] : g.frequency) {
      std::snprintf(buf, sizeof(buf), "  %s %zu (%.2f%%)",
                    std::string(frequency_name(f)).c_str(), row.count, row.pct);
      out += buf;
    }
    out += "\n\n";
  }
  return out;
}

}  // namespace detour
