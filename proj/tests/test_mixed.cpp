#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "detour/mixed.hpp"
#include "detour/oracle.hpp"
#include "test_support.hpp"

using namespace detour;
using detour::test::make_obs;

namespace {

// Two-mode spec with a mixed slope on the bike time attribute.
struct MixedToyProblem {
  Dataset dataset;
  DesignMatrix x;
  ModelSpec spec;
};

MixedToyProblem mixed_toy(std::mt19937_64& rng, std::size_t n_obs, double asc,
                          double slope_mean, double slope_sigma) {
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1p-53);
  };
  auto gauss = [&] {
    return inverse_normal_cdf(
        std::min(1.0 - 1e-12,
                 std::max(1e-12, static_cast<double>(rng() >> 11) * 0x1p-53)));
  };
  MixedToyProblem toy;
  toy.spec.id = "mixed-toy";
  toy.spec.base_mode = Mode::walking;
  ModeMask bike{};
  bike[mode_index(Mode::bike)] = true;
  toy.spec.terms.push_back({"ASC_BIKE", "const", bike});
  toy.spec.terms.push_back({"B_TIME", "time", bike});
  toy.spec.mixing["B_TIME"] = {"SIGMA_TIME"};
  toy.spec.draws = {100, DrawType::halton, 42};

  toy.x = DesignMatrix::zeros(n_obs);
  std::vector<Observation> rows;
  for (std::size_t q = 0; q < n_obs; ++q) {
    for (Mode m : kAllModes) toy.x.set_available(q, m, false);
    toy.x.set_available(q, Mode::walking, true);
    toy.x.set_available(q, Mode::bike, true);
    toy.x.at(q, Mode::bike, 0) = 1.0;
    const double t = uniform(-1.5, 1.5);
    toy.x.at(q, Mode::bike, 1) = t;
    const double beta = slope_mean + slope_sigma * gauss();
    const double v = asc + beta * t;
    const double p_bike = 1.0 / (1.0 + std::exp(-v));
    const Mode chosen = uniform(0.0, 1.0) < p_bike ? Mode::bike : Mode::walking;
    rows.push_back(
        make_obs("m" + std::to_string(q), chosen, 30.0, 90.0, false));
  }
  toy.dataset = Dataset(rows);
  return toy;
}

}  // namespace

TEST_CASE("zero sigma reproduces plain MNL probabilities exactly") {
  std::mt19937_64 rng(4);
  const MixedToyProblem toy = mixed_toy(rng, 20, 0.5, 1.0, 0.0);
  const CompiledSpec cs = compile_spec(toy.spec);
  const DrawTensor draws = make_draws(20, 50, 1, DrawType::halton, 42);
  Vector theta = {0.5, 1.0, 0.0};  // ASC, B_TIME, SIGMA_TIME
  ModelSpec plain = toy.spec;
  plain.mixing.clear();
  const CompiledSpec cs_plain = compile_spec(plain);
  Vector beta = {0.5, 1.0};
  for (std::size_t q = 0; q < 20; ++q) {
    const ModeArray sim = simulated_probability(toy.x, q, theta, cs, draws);
    ModeMask avail{};
    for (Mode m : kAllModes) avail[mode_index(m)] = toy.x.is_available(q, m);
    const ModeArray exact = choice_probabilities(
        utilities_compiled(toy.x, q, beta, cs_plain), avail);
    for (Mode m : kAllModes) {
      CHECK_THAT(sim[mode_index(m)],
                 Catch::Matchers::WithinAbs(exact[mode_index(m)], 1e-12));
    }
  }
}

TEST_CASE("simulated probabilities sum to one") {
  std::mt19937_64 rng(9);
  const MixedToyProblem toy = mixed_toy(rng, 10, 0.3, -0.7, 0.5);
  const CompiledSpec cs = compile_spec(toy.spec);
  const DrawTensor draws = make_draws(10, 100, 1, DrawType::halton, 42);
  Vector theta = {0.3, -0.7, 0.5};
  for (std::size_t q = 0; q < 10; ++q) {
    const ModeArray p = simulated_probability(toy.x, q, theta, cs, draws);
    double total = 0.0;
    for (Mode m : kAllModes) total += p[mode_index(m)];
    CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("simulated probability agrees with Gauss-Hermite quadrature") {
  // one observation, two modes, mixed slope: compare against the
  // 64-node quadrature evaluation of the same integral
  DesignMatrix x = DesignMatrix::zeros(1);
  for (Mode m : kAllModes) x.set_available(0, m, false);
  x.set_available(0, Mode::walking, true);
  x.set_available(0, Mode::bike, true);
  x.at(0, Mode::bike, 0) = 1.0;
  x.at(0, Mode::bike, 1) = 1.0;

  ModelSpec spec;
  spec.id = "gh-toy";
  ModeMask bike{};
  bike[mode_index(Mode::bike)] = true;
  spec.terms.push_back({"B_TIME", "time", bike});
  spec.mixing["B_TIME"] = {"SIGMA_TIME"};
  const CompiledSpec cs = compile_spec(spec);

  const double mean = 1.0, sigma = 0.5;
  Vector theta = {mean, sigma};
  const DrawTensor draws = make_draws(1, 10000, 1, DrawType::halton, 42);
  const ModeArray sim = simulated_probability(x, 0, theta, cs, draws);

  MixedToy toy;
  toy.n_modes = 2;
  toy.base_utility = {0.0, 0.0};
  toy.mixed_x = {0.0, 1.0};
  toy.mean = mean;
  toy.sigma = sigma;
  toy.target_mode = 1;
  const double quad = quadrature_mixed_probability(toy, 64);

  CHECK(std::abs(sim[mode_index(Mode::bike)] - quad) < 1e-3);
  // frozen reference from an independent evaluation of this integral
  CHECK_THAT(quad, Catch::Matchers::WithinAbs(0.7205808152, 1e-8));
}

TEST_CASE("symmetric draws on a symmetric problem keep a fifty-fifty split") {
  DesignMatrix x = DesignMatrix::zeros(1);
  for (Mode m : kAllModes) x.set_available(0, m, false);
  x.set_available(0, Mode::walking, true);
  x.set_available(0, Mode::bike, true);
  x.at(0, Mode::bike, 1) = 1.0;
  ModelSpec spec;
  spec.id = "sym";
  ModeMask bike{};
  bike[mode_index(Mode::bike)] = true;
  spec.terms.push_back({"B_TIME", "time", bike});
  spec.mixing["B_TIME"] = {"SIGMA"};
  const CompiledSpec cs = compile_spec(spec);
  // hand-made +/- sigma draw pair with zero mean
  DrawTensor draws;
  draws.n_obs = 1;
  draws.n_draws = 2;
  draws.n_dims = 1;
  draws.z = {1.3, -1.3};
  Vector theta = {0.0, 0.8};
  const ModeArray p = simulated_probability(x, 0, theta, cs, draws);
  CHECK_THAT(p[mode_index(Mode::bike)],
             Catch::Matchers::WithinAbs(0.5, 1e-14));
}

TEST_CASE("zero draws are rejected") {
  std::mt19937_64 rng(2);
  const MixedToyProblem toy = mixed_toy(rng, 3, 0.0, 0.0, 0.1);
  const CompiledSpec cs = compile_spec(toy.spec);
  DrawTensor empty;
  empty.n_obs = 3;
  empty.n_draws = 0;
  empty.n_dims = 1;
  Vector theta = {0.0, 0.0, 0.1};
  CHECK_THROWS_AS(simulated_probability(toy.x, 0, theta, cs, empty),
                  ArgumentError);
}

TEST_CASE("simulated likelihood is deterministic within a run") {
  std::mt19937_64 rng(13);
  const MixedToyProblem toy = mixed_toy(rng, 120, 0.4, -0.9, 0.5);
  const CompiledSpec cs = compile_spec(toy.spec);
  const DrawTensor draws = make_draws(120, 100, 1, DrawType::halton, 42);
  Vector theta = {0.3, -0.8, 0.4};
  const LogLikResult a =
      simulated_log_likelihood(toy.dataset, toy.x, theta, cs, draws, 1);
  const LogLikResult b =
      simulated_log_likelihood(toy.dataset, toy.x, theta, cs, draws, 4);
  CHECK(a.value == b.value);
  CHECK(a.gradient == b.gradient);
}

TEST_CASE("simulated gradient matches finite differences") {
  std::mt19937_64 rng(23);
  const MixedToyProblem toy = mixed_toy(rng, 60, 0.4, -0.9, 0.5);
  const CompiledSpec cs = compile_spec(toy.spec);
  const DrawTensor draws = make_draws(60, 50, 1, DrawType::halton, 42);
  Vector theta = {0.25, -0.6, 0.35};
  const LogLikResult ll =
      simulated_log_likelihood(toy.dataset, toy.x, theta, cs, draws);
  const double h = 1e-6;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    Vector tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    const double fp =
        simulated_log_likelihood(toy.dataset, toy.x, tp, cs, draws).value;
    const double fm =
        simulated_log_likelihood(toy.dataset, toy.x, tm, cs, draws).value;
    const double fd = (fp - fm) / (2.0 * h);
    CHECK_THAT(ll.gradient[j],
               Catch::Matchers::WithinAbs(fd, 1e-5 * std::max(1.0, std::abs(fd))));
  }
}

TEST_CASE("simulated probability converges to MNL as sigma shrinks") {
  std::mt19937_64 rng(3);
  const MixedToyProblem toy = mixed_toy(rng, 15, 0.5, 1.0, 0.0);
  const CompiledSpec cs = compile_spec(toy.spec);
  const DrawTensor draws = make_draws(15, 200, 1, DrawType::halton, 42);
  ModelSpec plain = toy.spec;
  plain.mixing.clear();
  const CompiledSpec cs_plain = compile_spec(plain);
  Vector beta = {0.5, 1.0};
  for (double sigma : {1e-3, 1e-6}) {
    double worst = 0.0;
    Vector theta = {0.5, 1.0, sigma};
    for (std::size_t q = 0; q < 15; ++q) {
      const ModeArray sim = simulated_probability(toy.x, q, theta, cs, draws);
      ModeMask avail{};
      for (Mode m : kAllModes) avail[mode_index(m)] = toy.x.is_available(q, m);
      const ModeArray exact = choice_probabilities(
          utilities_compiled(toy.x, q, beta, cs_plain), avail);
      for (Mode m : kAllModes) {
        worst = std::max(worst, std::abs(sim[mode_index(m)] -
                                         exact[mode_index(m)]));
      }
    }
    CHECK(worst < 3.0 * sigma);
  }
}

TEST_CASE("doubling halton draws shrinks the simulation error") {
  std::mt19937_64 rng(77);
  const MixedToyProblem toy = mixed_toy(rng, 40, 0.4, -0.9, 0.6);
  const CompiledSpec cs = compile_spec(toy.spec);
  Vector theta = {0.4, -0.9, 0.6};
  // reference at a very large draw count
  const DrawTensor ref = make_draws(40, 25600, 1, DrawType::halton, 42);
  const double ll_ref =
      simulated_log_likelihood(toy.dataset, toy.x, theta, cs, ref).value;
  double prev_err = 1e300;
  for (std::size_t r : {100u, 400u, 1600u}) {
    const DrawTensor draws = make_draws(40, r, 1, DrawType::halton, 42);
    const double ll =
        simulated_log_likelihood(toy.dataset, toy.x, theta, cs, draws).value;
    const double err = std::abs(ll - ll_ref);
    CHECK(err < prev_err + 1e-9);
    prev_err = err;
  }
}

TEST_CASE("estimate_mixed with no mixing equals plain estimate") {
  std::mt19937_64 rng(41);
  MixedToyProblem toy = mixed_toy(rng, 200, 0.5, -1.0, 0.0);
  toy.spec.mixing.clear();
  const EstimationResult a = estimate_mixed(toy.dataset, toy.x, toy.spec);
  const EstimationResult b = estimate(toy.dataset, toy.x, toy.spec);
  REQUIRE(a.names == b.names);
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    CHECK_THAT(a.values[j], Catch::Matchers::WithinAbs(b.values[j], 1e-8));
  }
  CHECK_THAT(a.ll_final, Catch::Matchers::WithinAbs(b.ll_final, 1e-10));
}

TEST_CASE("mixture recovery: sigma estimated within three robust SE") {
  std::mt19937_64 rng(2718);
  const double true_sigma = 1.5;
  const MixedToyProblem toy = mixed_toy(rng, 1500, 0.8, -1.2, true_sigma);
  OptimizerOptions opts;
  opts.max_iterations = 800;
  const EstimationResult res = estimate_mixed(toy.dataset, toy.x, toy.spec,
                                              opts);
  REQUIRE(res.converged);
  REQUIRE(res.names.size() == 3);
  REQUIRE(res.names[2] == "SIGMA_TIME");
  const double sigma_hat = std::abs(res.values[2]);
  const double se = res.robust_se[2];
  INFO("sigma_hat=" << sigma_hat << " se=" << se);
  CHECK(std::abs(sigma_hat - true_sigma) < 3.0 * se);
  // mean and ASC recovered too
  CHECK(std::abs(res.values[0] - 0.8) < 3.0 * res.robust_se[0]);
  CHECK(std::abs(res.values[1] - (-1.2)) < 3.0 * res.robust_se[1]);
  CHECK(res.ll_final >= res.ll_null);
  CHECK(res.draw_count == 100);
}

TEST_CASE("mixture null log-likelihood is the equal-shares value") {
  std::mt19937_64 rng(5);
  const MixedToyProblem toy = mixed_toy(rng, 100, 0.2, -0.5, 0.3);
  const EstimationResult res = estimate_mixed(toy.dataset, toy.x, toy.spec);
  CHECK_THAT(res.ll_null,
             Catch::Matchers::WithinAbs(100.0 * std::log(0.5), 1e-9));
}
