#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "detour/estimate.hpp"
#include "detour/oracle.hpp"
#include "detour/synthetic.hpp"
#include "test_support.hpp"

using namespace detour;
using detour::test::make_obs;

namespace {

// Two-mode toy with one or two free coefficients and independent attribute
// variation, drawn from a seeded generator.
struct BinaryToy {
  Dataset dataset;
  DesignMatrix x;
  ModelSpec spec;
};

BinaryToy binary_toy(std::mt19937_64& rng, std::size_t n_obs, double asc,
                     double slope, bool with_slope) {
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1p-53);
  };
  BinaryToy toy;
  toy.spec.id = "binary-toy";
  toy.spec.base_mode = Mode::walking;
  ModeMask bike{};
  bike[mode_index(Mode::bike)] = true;
  toy.spec.terms.push_back({"ASC_BIKE", "const", bike});
  if (with_slope) toy.spec.terms.push_back({"B_TIME", "time", bike});

  toy.x = DesignMatrix::zeros(n_obs);
  std::vector<Observation> rows;
  for (std::size_t q = 0; q < n_obs; ++q) {
    for (Mode m : kAllModes) toy.x.set_available(q, m, false);
    toy.x.set_available(q, Mode::walking, true);
    toy.x.set_available(q, Mode::bike, true);
    toy.x.at(q, Mode::bike, 0) = 1.0;
    const double t = uniform(-1.5, 1.5);
    toy.x.at(q, Mode::bike, 1) = with_slope ? t : 0.0;
    const double v = asc + (with_slope ? slope * t : 0.0);
    const double p_bike = 1.0 / (1.0 + std::exp(-v));
    const Mode chosen = uniform(0.0, 1.0) < p_bike ? Mode::bike : Mode::walking;
    rows.push_back(make_obs("b" + std::to_string(q), chosen, 30.0, 90.0,
                            false));
  }
  toy.dataset = Dataset(rows);
  return toy;
}

}  // namespace

TEST_CASE("fit statistics reproduce the published rho-squares") {
  CHECK_THAT(fit_statistics(-431.02, -182.19, 20),
             Catch::Matchers::WithinAbs(0.531, 1e-3));
  CHECK_THAT(fit_statistics(-431.02, -165.202, 22),
             Catch::Matchers::WithinAbs(0.566, 1e-3));
  // exact values of the formula, frozen
  CHECK_THAT(fit_statistics(-431.02, -182.19, 20),
             Catch::Matchers::WithinAbs(0.5309034383555287, 1e-12));
  CHECK_THAT(fit_statistics(-431.02, -165.202, 22),
             Catch::Matchers::WithinAbs(0.5656767667393624, 1e-12));
  // null model against itself
  CHECK(fit_statistics(-100.0, -100.0, 0) == 0.0);
  CHECK_THROWS_AS(fit_statistics(0.0, -1.0, 2), ArgumentError);
}

TEST_CASE("estimate matches the grid oracle on five random binary toys") {
  std::mt19937_64 rng(424242);
  for (int rep = 0; rep < 5; ++rep) {
    auto uniform = [&rng](double lo, double hi) {
      return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1p-53);
    };
    const double asc = uniform(-1.5, 1.5);
    const double slope = uniform(-2.0, 2.0);
    const BinaryToy toy = binary_toy(rng, 200, asc, slope, true);
    const EstimationResult res = estimate(toy.dataset, toy.x, toy.spec);
    REQUIRE(res.converged);

    // staged exhaustive grids: coarse bracket, then refine
    std::vector<GridRange> coarse = {{"ASC_BIKE", -20.0, 20.0, 0.1},
                                     {"B_TIME", -20.0, 20.0, 0.1}};
    const GridMleResult g1 = grid_mle(toy.dataset, toy.x, toy.spec, coarse);
    CHECK_FALSE(g1.on_boundary);
    std::vector<GridRange> fine = {
        {"ASC_BIKE", g1.values[0] - 0.15, g1.values[0] + 0.15, 1e-3},
        {"B_TIME", g1.values[1] - 0.15, g1.values[1] + 0.15, 1e-3}};
    const GridMleResult g2 = grid_mle(toy.dataset, toy.x, toy.spec, fine);
    CHECK_FALSE(g2.on_boundary);

    for (std::size_t j = 0; j < res.names.size(); ++j) {
      double grid_value = 0.0;
      for (std::size_t i = 0; i < g2.names.size(); ++i) {
        if (g2.names[i] == res.names[j]) grid_value = g2.values[i];
      }
      CHECK_THAT(res.values[j],
                 Catch::Matchers::WithinAbs(grid_value, 1e-3));
    }
  }
}

TEST_CASE("estimation result invariants hold on a toy") {
  std::mt19937_64 rng(7);
  const BinaryToy toy = binary_toy(rng, 400, 0.8, -1.2, true);
  const EstimationResult res = estimate(toy.dataset, toy.x, toy.spec);
  REQUIRE(res.converged);
  CHECK(res.ll_final >= res.ll_null);
  CHECK(res.gradient_norm_at_solution < 1e-6);
  CHECK(res.n_parameters == 2);
  CHECK(res.sample_size == 400);
  CHECK_THAT(res.adjusted_rho_sq,
             Catch::Matchers::WithinAbs(
                 fit_statistics(res.ll_null, res.ll_final, 2), 1e-12));
  // covariance is symmetric positive semidefinite
  const Matrix& cov = res.robust_covariance;
  for (std::size_t i = 0; i < cov.rows(); ++i) {
    CHECK(cov(i, i) >= 0.0);
    for (std::size_t j = 0; j < cov.cols(); ++j) {
      CHECK(cov(i, j) == cov(j, i));
    }
  }
  const EigenDecomposition eig = [&] {
    Matrix c = cov;
    return eigen_symmetric(c);
  }();
  for (double lambda : eig.eigenvalues) CHECK(lambda > -1e-10);
}

TEST_CASE("optimum beats zero and random perturbations") {
  std::mt19937_64 rng(99);
  const BinaryToy toy = binary_toy(rng, 300, 0.5, 1.0, true);
  const EstimationResult res = estimate(toy.dataset, toy.x, toy.spec);
  const CompiledSpec cs = compile_spec(toy.spec);
  const double at_opt =
      log_likelihood(toy.dataset, toy.x, res.values, cs).value;
  CHECK(at_opt >= res.ll_null);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1p-53);
  };
  for (int rep = 0; rep < 100; ++rep) {
    Vector perturbed = res.values;
    double norm = 0.0;
    Vector dir(perturbed.size());
    for (double& v : dir) {
      v = uniform(-1.0, 1.0);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < perturbed.size(); ++j) {
      perturbed[j] += 0.1 * dir[j] / norm;
    }
    const double ll =
        log_likelihood(toy.dataset, toy.x, perturbed, cs).value;
    CHECK(ll <= at_opt + 1e-12);
  }
}

TEST_CASE("estimate is bit-identical across runs and thread counts") {
  std::mt19937_64 rng(31);
  const BinaryToy toy = binary_toy(rng, 250, -0.4, 0.9, true);
  OptimizerOptions one;
  one.threads = 1;
  OptimizerOptions many;
  many.threads = 8;
  const EstimationResult a = estimate(toy.dataset, toy.x, toy.spec, one);
  const EstimationResult b = estimate(toy.dataset, toy.x, toy.spec, many);
  const EstimationResult c = estimate(toy.dataset, toy.x, toy.spec, one);
  CHECK(a.values == b.values);
  CHECK(a.values == c.values);
  CHECK(a.ll_final == b.ll_final);
  CHECK(a.robust_se == b.robust_se);
}

TEST_CASE("argmax invariance under attribute/coefficient rescaling") {
  std::mt19937_64 rng(55);
  const BinaryToy toy = binary_toy(rng, 300, 0.6, -0.8, true);
  const EstimationResult res = estimate(toy.dataset, toy.x, toy.spec);
  const double c = 4.0;
  BinaryToy scaled = toy;
  for (std::size_t q = 0; q < scaled.x.n_obs; ++q) {
    scaled.x.at(q, Mode::bike, 1) *= c;
  }
  const CompiledSpec cs = compile_spec(toy.spec);
  // coefficients divided by c reproduce identical probabilities
  Vector beta_scaled = res.values;
  beta_scaled[1] /= c;
  for (std::size_t q = 0; q < toy.x.n_obs; ++q) {
    ModeMask avail{};
    for (Mode m : kAllModes) avail[mode_index(m)] = toy.x.is_available(q, m);
    const ModeArray p0 =
        choice_probabilities(utilities_compiled(toy.x, q, res.values, cs),
                             avail);
    const ModeArray p1 = choice_probabilities(
        utilities_compiled(scaled.x, q, beta_scaled, cs), avail);
    for (Mode m : kAllModes) {
      CHECK_THAT(p1[mode_index(m)],
                 Catch::Matchers::WithinAbs(p0[mode_index(m)], 1e-10));
    }
  }
}

TEST_CASE("separation is flagged when a parameter diverges") {
  // every observation picks bike and the attribute is small, so the
  // coefficient has to run far past 50 before the gradient flattens out
  std::vector<Observation> rows;
  DesignMatrix x = DesignMatrix::zeros(60);
  for (std::size_t q = 0; q < 60; ++q) {
    for (Mode m : kAllModes) x.set_available(q, m, false);
    x.set_available(q, Mode::walking, true);
    x.set_available(q, Mode::bike, true);
    x.at(q, Mode::bike, 1) = 0.1;
    rows.push_back(make_obs("s" + std::to_string(q), Mode::bike, 30.0, 90.0,
                            false));
  }
  ModelSpec spec;
  spec.id = "separated";
  ModeMask bike{};
  bike[mode_index(Mode::bike)] = true;
  spec.terms.push_back({"B_TIME", "time", bike});
  OptimizerOptions opts;
  opts.max_iterations = 2000;
  const EstimationResult res = estimate(Dataset(rows), x, spec, opts);
  bool flagged = false;
  for (const std::string& w : res.warnings) {
    flagged = flagged || (w.find("separation") != std::string::npos &&
                          w.find("B_TIME") != std::string::npos);
  }
  CHECK(flagged);
}

TEST_CASE("coefficient applying to zero cells is rejected") {
  std::mt19937_64 rng(8);
  BinaryToy toy = binary_toy(rng, 50, 0.0, 0.0, false);
  ModeMask car{};
  car[mode_index(Mode::car)] = true;
  toy.spec.terms.push_back({"ASC_CAR", "const", car});  // car never available
  CHECK_THROWS_AS(estimate(toy.dataset, toy.x, toy.spec), SpecError);
}

TEST_CASE("fixed coefficients are honored and excluded from estimation") {
  std::mt19937_64 rng(12);
  BinaryToy toy = binary_toy(rng, 400, 0.75, -1.0, true);
  toy.spec.fixed["B_TIME"] = -1.0;
  const EstimationResult res = estimate(toy.dataset, toy.x, toy.spec);
  REQUIRE(res.names.size() == 1);
  CHECK(res.names[0] == "ASC_BIKE");
  // with the slope pinned at truth the ASC estimate is consistent
  CHECK_THAT(res.values[0], Catch::Matchers::WithinAbs(0.75, 0.35));
}
