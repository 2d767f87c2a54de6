#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "detour/dataset.hpp"
#include "detour/draws.hpp"
#include "detour/mnl.hpp"
#include "detour/model_spec.hpp"
#include "detour/network.hpp"
#include "detour/synthesis.hpp"

namespace detour {

// Weighted discrete sampler option.
template <typename T>
struct WeightedOption {
  T value;
  double weight = 1.0;
};

// Configuration of the synthetic-data generator. Covariate samplers use the
// survey instrument's discrete option sets so synthetic fits stress the
// same attribute geometry as the real pipeline.
struct SyntheticConfig {
  std::map<std::string, double> true_parameters;
  ModelSpec spec;
  std::size_t n_obs = 249;
  double car_ownership_rate = 166.0 / 249.0;
  double female_rate = 121.0 / 249.0;
  NetworkParams network;
  ScalingConfig scaling;
  std::vector<double> detour_minute_options = {15.0, 30.0, 45.0, 60.0};
  std::vector<double> remuneration_options = {50.0, 60.0, 75.0,
                                              90.0, 100.0, 120.0};
  // monthly wage band midpoints with the sample's band frequencies
  std::vector<WeightedOption<double>> income_options = {
      {2500.0, 28.0},  {7500.0, 83.0},  {15000.0, 80.0}, {25000.0, 30.0},
      {35000.0, 6.0},  {45000.0, 9.0},  {55000.0, 13.0}};
  std::vector<WeightedOption<AgeBand>> age_options = {
      {AgeBand::a18_24, 81.0},
      {AgeBand::a25_34, 58.0},
      {AgeBand::a35_44, 62.0},
      {AgeBand::a45_plus, 48.0}};
  std::vector<WeightedOption<TripChain>> trip_chain_options = {
      {TripChain::HW, 32.0},
      {TripChain::WH, 94.0},
      {TripChain::WG, 50.0},
      {TripChain::HH, 73.0}};
  std::vector<WeightedOption<Frequency>> frequency_options = {
      {Frequency::everyday, 11.0},
      {Frequency::several_times_week, 58.0},
      {Frequency::once_week, 65.0},
      {Frequency::several_times_month, 31.0},
      {Frequency::once_month, 43.0},
      {Frequency::less_than_once_month, 41.0}};
  std::uint64_t seed = 1;
};

struct GeneratorTallies {
  std::size_t car_available = 0;
  std::array<std::size_t, kModeCount> chosen{};
  std::array<std::size_t, kGenderCount> gender{};
};

struct GeneratedData {
  Dataset dataset;
  GeneratorTallies tallies;
};

namespace detail {

class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed) : rng_(seed) {}

  double uniform() {
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>(rng_() >> 11) + 0.5) * kScale;
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::size_t index(std::size_t n) {
    return std::min<std::size_t>(static_cast<std::size_t>(uniform() *
                                                          static_cast<double>(n)),
                                 n - 1);
  }

  template <typename T>
  T weighted(const std::vector<WeightedOption<T>>& options) {
    double total = 0.0;
    for (const auto& o : options) total += o.weight;
    double u = uniform() * total;
    for (const auto& o : options) {
      u -= o.weight;
      if (u < 0.0) return o.value;
    }
    return options.back().value;
  }

  double gaussian() { return inverse_normal_cdf(uniform()); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detail

// Draws a synthetic dataset from the true model: samples covariates and a
// reference (anchor) mode/detour pair, reconstructs the full attribute set
// through the detour-synthesis fan-out, and draws the chosen mode from the
// model's choice probabilities. The recorded stated detour is the chosen
// mode's reconstructed time, so re-synthesised attributes reproduce the
// generating design matrix exactly.
inline GeneratedData generate(const SyntheticConfig& cfg) {
  cfg.spec.validate();
  cfg.network.validate();
  cfg.scaling.validate();
  const CompiledSpec cs = compile_spec(cfg.spec);
  Vector theta(cs.n_free());
  for (std::size_t i = 0; i < cs.n_free(); ++i) {
    auto it = cfg.true_parameters.find(cs.names[i]);
    if (it == cfg.true_parameters.end()) {
      throw SpecError("true_parameters missing coefficient '" + cs.names[i] +
                      "'");
    }
    theta[i] = it->second;
  }

  detail::SampleStream rng(cfg.seed);
  GeneratedData out;
  std::vector<Observation> rows;
  rows.reserve(cfg.n_obs);

  for (std::size_t q = 0; q < cfg.n_obs; ++q) {
    Observation o;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "q%05zu", q + 1);
    o.id = idbuf;
    o.gender = rng.bernoulli(cfg.female_rate) ? Gender::female : Gender::male;
    o.car_available = rng.bernoulli(cfg.car_ownership_rate);
    o.income_uah = rng.weighted(cfg.income_options);
    o.age_band = rng.weighted(cfg.age_options);
    o.trip_chain = rng.weighted(cfg.trip_chain_options);
    o.frequency = rng.weighted(cfg.frequency_options);
    o.remuneration_uah =
        cfg.remuneration_options[rng.index(cfg.remuneration_options.size())];

    const Mode anchor = kAllModes[rng.index(kModeCount)];
    const double anchor_min =
        cfg.detour_minute_options[rng.index(cfg.detour_minute_options.size())];
    const double distance = detour_distance(anchor, anchor_min, cfg.network);
    const ModeArray times = alternative_detour_times(distance, cfg.network);

    // one-row design matrix for the choice draw
    DesignMatrix x = DesignMatrix::zeros(1);
    for (Mode m : kAllModes) {
      const int i = mode_index(m);
      const double cost = detour_cost(m, distance, cfg.network);
      x.at(0, m, 0) = 1.0;
      x.at(0, m, 1) = times[i] / cfg.scaling.detour_time_divisor;
      x.at(0, m, 2) = cost / cfg.scaling.detour_cost_divisor;
      x.at(0, m, 3) =
          profit(o.remuneration_uah, cost) / cfg.scaling.profit_divisor;
      x.at(0, m, 4) = o.income_uah / cfg.scaling.income_divisor;
      x.set_available(0, m, m == Mode::car ? o.car_available : true);
    }

    // population draw for mixed coefficients (one per mixing dimension)
    Vector beta_eff = theta;
    for (const CompiledSpec::MixedTerm& mt : cs.mixed) {
      const CompiledTerm& t = cs.terms[mt.term];
      if (t.param < 0) continue;
      beta_eff[t.param] =
          theta[t.param] + theta[mt.sigma_param] * rng.gaussian();
    }

    ModeMask avail{};
    for (Mode m : kAllModes) avail[mode_index(m)] = x.is_available(0, m);
    const ModeArray v = utilities_compiled(x, 0, beta_eff, cs);
    const ModeArray p = choice_probabilities(v, avail);

    const double u = rng.uniform();
    double cum = 0.0;
    Mode chosen = Mode::walking;
    for (Mode m : kAllModes) {
      if (!avail[mode_index(m)]) continue;
      cum += p[mode_index(m)];
      chosen = m;
      if (u < cum) break;
    }
    o.chosen_mode = chosen;
    o.stated_detour_min = times[mode_index(chosen)];

    if (o.car_available) ++out.tallies.car_available;
    ++out.tallies.chosen[mode_index(chosen)];
    ++out.tallies.gender[static_cast<int>(o.gender)];
    rows.push_back(std::move(o));
  }
  out.dataset = Dataset(std::move(rows));
  return out;
}

}  // namespace detour
