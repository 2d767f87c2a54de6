#pragma once

#include <array>
#include <cstddef>
#include <iostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "detour/csv.hpp"
#include "detour/error.hpp"
#include "detour/mode.hpp"

namespace detour {

enum class Gender : int { female = 0, male = 1 };

enum class AgeBand : int { a18_24 = 0, a25_34 = 1, a35_44 = 2, a45_plus = 3 };

enum class TripChain : int { HW = 0, WH = 1, WG = 2, HH = 3 };

enum class Frequency : int {
  everyday = 0,
  several_times_week = 1,
  once_week = 2,
  several_times_month = 3,
  once_month = 4,
  less_than_once_month = 5,
};

inline constexpr std::size_t kGenderCount = 2;
inline constexpr std::size_t kAgeBandCount = 4;
inline constexpr std::size_t kTripChainCount = 4;
inline constexpr std::size_t kFrequencyCount = 6;

constexpr std::string_view gender_name(Gender g) {
  return g == Gender::female ? "female" : "male";
}

constexpr std::string_view age_band_name(AgeBand a) {
  switch (a) {
    case AgeBand::a18_24: return "18-24";
    case AgeBand::a25_34: return "25-34";
    case AgeBand::a35_44: return "35-44";
    case AgeBand::a45_plus: return "45+";
  }
  return "?";
}

constexpr std::string_view trip_chain_name(TripChain t) {
  switch (t) {
    case TripChain::HW: return "HW";
    case TripChain::WH: return "WH";
    case TripChain::WG: return "WG";
    case TripChain::HH: return "HH";
  }
  return "?";
}

constexpr std::string_view frequency_name(Frequency f) {
  switch (f) {
    case Frequency::everyday: return "everyday";
    case Frequency::several_times_week: return "several_times_week";
    case Frequency::once_week: return "once_week";
    case Frequency::several_times_month: return "several_times_month";
    case Frequency::once_month: return "once_month";
    case Frequency::less_than_once_month: return "less_than_once_month";
  }
  return "?";
}

inline Gender parse_gender(std::string_view s) {
  if (s == "female") return Gender::female;
  if (s == "male") return Gender::male;
  throw ParseError("unknown gender: '" + std::string(s) + "'");
}

inline AgeBand parse_age_band(std::string_view s) {
  for (int i = 0; i < static_cast<int>(kAgeBandCount); ++i) {
    if (s == age_band_name(static_cast<AgeBand>(i))) {
      return static_cast<AgeBand>(i);
    }
  }
  throw ParseError("unknown age_band: '" + std::string(s) + "'");
}

inline TripChain parse_trip_chain(std::string_view s) {
  for (int i = 0; i < static_cast<int>(kTripChainCount); ++i) {
    if (s == trip_chain_name(static_cast<TripChain>(i))) {
      return static_cast<TripChain>(i);
    }
  }
  throw ParseError("unknown trip_chain: '" + std::string(s) + "'");
}

inline Frequency parse_frequency(std::string_view s) {
  for (int i = 0; i < static_cast<int>(kFrequencyCount); ++i) {
    if (s == frequency_name(static_cast<Frequency>(i))) {
      return static_cast<Frequency>(i);
    }
  }
  throw ParseError("unknown frequency: '" + std::string(s) + "'");
}

// One survey respondent: the chosen courier mode, the stated detour time
// for that mode, the expected remuneration, and covariates.
struct Observation {
  std::string id;
  Gender gender = Gender::female;
  AgeBand age_band = AgeBand::a18_24;
  double income_uah = 0.0;
  bool car_available = false;
  Mode chosen_mode = Mode::walking;
  double stated_detour_min = 0.0;
  double remuneration_uah = 0.0;
  TripChain trip_chain = TripChain::HW;
  Frequency frequency = Frequency::everyday;
};

inline constexpr std::array<std::string_view, 10> kDatasetColumns = {
    "id",          "gender",           "age_band",
    "income_uah",  "car_available",    "chosen_mode",
    "stated_detour_min", "remuneration_uah", "trip_chain",
    "frequency"};

// Immutable after load; availability of the car alternative is conditioned
// on household car access, every other mode is universally available.
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(std::vector<Observation> observations)
      : observations_(std::move(observations)) {
    validate();
  }

  const std::vector<Observation>& observations() const { return observations_; }
  std::size_t size() const { return observations_.size(); }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }

  bool available(std::size_t obs, Mode m) const {
    if (m == Mode::car) return observations_[obs].car_available;
    return true;
  }

  ModeMask availability_mask(std::size_t obs) const {
    ModeMask mask;
    for (Mode m : kAllModes) mask[mode_index(m)] = available(obs, m);
    return mask;
  }

  std::size_t choice_set_size(std::size_t obs) const {
    return observations_[obs].car_available ? kModeCount : kModeCount - 1;
  }

  // Canonical CSV form: loading the output reproduces it byte for byte.
  std::string to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) {
      if (i) out += ',';
      out += kDatasetColumns[i];
    }
    out += '\n';
    for (const Observation& o : observations_) {
      out += o.id;
      out += ',';
      out += gender_name(o.gender);
      out += ',';
      out += age_band_name(o.age_band);
      out += ',';
      out += format_number(o.income_uah);
      out += ',';
      out += o.car_available ? "true" : "false";
      out += ',';
      out += mode_name(o.chosen_mode);
      out += ',';
      out += format_number(o.stated_detour_min);
      out += ',';
      out += format_number(o.remuneration_uah);
      out += ',';
      out += trip_chain_name(o.trip_chain);
      out += ',';
      out += frequency_name(o.frequency);
      out += '\n';
    }
    return out;
  }

 private:
  void validate() const {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < observations_.size(); ++i) {
      const Observation& o = observations_[i];
      if (!seen.insert(o.id).second) {
        throw ValidationError("duplicate observation id '" + o.id + "'");
      }
      if (o.chosen_mode == Mode::car && !o.car_available) {
        throw ValidationError("row id '" + o.id +
                              "': chosen_mode is car but car_available is false");
      }
      if (!(o.stated_detour_min > 0.0)) {
        throw ValidationError("row id '" + o.id +
                              "': stated_detour_min must be positive");
      }
      if (!(o.remuneration_uah > 0.0)) {
        throw ValidationError("row id '" + o.id +
                              "': remuneration_uah must be positive");
      }
      if (!(o.income_uah > 0.0)) {
        throw ValidationError("row id '" + o.id +
                              "': income_uah must be positive");
      }
    }
  }

  std::vector<Observation> observations_;
};

// Loads a dataset CSV. Stated values outside the survey instrument's ranges
// are admitted with a warning (external datasets may legitimately exceed
// them); hard invariants still reject the row set.
inline Dataset load_dataset(const std::string& path,
                            std::ostream& warn_stream = std::cerr) {
  CsvTable table = read_csv(path);

  std::array<int, kDatasetColumns.size()> col{};
  for (std::size_t c = 0; c < kDatasetColumns.size(); ++c) {
    col[c] = table.column(std::string(kDatasetColumns[c]));
    if (col[c] < 0) {
      throw SchemaError("missing column '" + std::string(kDatasetColumns[c]) +
                        "' in " + path);
    }
  }
  if (table.rows.empty()) throw ValidationError("empty dataset: " + path);

  std::vector<Observation> obs;
  obs.reserve(table.rows.size());
  std::size_t detour_out_of_range = 0;
  std::size_t remuneration_out_of_range = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() < kDatasetColumns.size()) {
      throw ParseError("row " + std::to_string(r + 2) + " has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(kDatasetColumns.size()));
    }
    const std::string where = "row " + std::to_string(r + 2);
    Observation o;
    o.id = row[col[0]];
    o.gender = parse_gender(row[col[1]]);
    o.age_band = parse_age_band(row[col[2]]);
    o.income_uah = parse_double(row[col[3]], where + " column income_uah");
    o.car_available = parse_bool(row[col[4]], where + " column car_available");
    o.chosen_mode = parse_mode(row[col[5]]);
    o.stated_detour_min =
        parse_double(row[col[6]], where + " column stated_detour_min");
    o.remuneration_uah =
        parse_double(row[col[7]], where + " column remuneration_uah");
    o.trip_chain = parse_trip_chain(row[col[8]]);
    o.frequency = parse_frequency(row[col[9]]);

    if (o.stated_detour_min < 15.0 || o.stated_detour_min > 60.0) {
      ++detour_out_of_range;
    }
    if (o.remuneration_uah < 50.0 || o.remuneration_uah > 120.0) {
      ++remuneration_out_of_range;
    }
    obs.push_back(std::move(o));
  }
  if (detour_out_of_range > 0) {
    warn_stream << "warning: " << detour_out_of_range
                << " row(s) with stated_detour_min outside [15, 60]\n";
  }
  if (remuneration_out_of_range > 0) {
    warn_stream << "warning: " << remuneration_out_of_range
                << " row(s) with remuneration_uah outside [50, 120]\n";
  }
  return Dataset(std::move(obs));
}

}  // namespace detour
