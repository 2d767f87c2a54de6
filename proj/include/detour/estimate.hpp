#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "detour/dataset.hpp"
#include "detour/error.hpp"
#include "detour/linalg.hpp"
#include "detour/mnl.hpp"
#include "detour/model_spec.hpp"
#include "detour/optimize.hpp"
#include "detour/parallel.hpp"
#include "detour/synthesis.hpp"

namespace detour {

struct EstimationResult {
  std::string model_id;
  std::vector<std::string> names;
  Vector values;
  Matrix robust_covariance;
  Vector robust_se;
  Vector robust_t;
  double ll_null = 0.0;
  double ll_final = 0.0;
  int n_parameters = 0;
  int sample_size = 0;
  double adjusted_rho_sq = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm_at_solution = 0.0;
  int draw_count = 0;  // 0 for plain MNL
  DrawType draw_type = DrawType::halton;
  std::uint64_t draw_seed = 0;
  std::vector<std::string> warnings;
};

// Adjusted rho-square: 1 - (LL_final - K) / LL_null.
inline double fit_statistics(double ll_null, double ll_final, int k) {
  if (ll_null == 0.0) throw ArgumentError("fit_statistics: ll_null is zero");
  if (!(ll_null < 0.0)) {
    throw ArgumentError("fit_statistics: ll_null must be negative");
  }
  return 1.0 - (ll_final - static_cast<double>(k)) / ll_null;
}

namespace detail {

// Threshold below which a Hessian eigenvalue is treated as numerically
// zero: the finite-difference noise floor relative to the largest
// curvature. Directions under it carry no curvature information; their
// variance contribution is dropped and a warning names the coefficients
// loading on them.
inline constexpr double kHessianRankTolerance = 1e-8;

struct SandwichResult {
  Matrix covariance;
  std::size_t weak_directions = 0;
  std::vector<std::string> weak_coefficients;
};

// Robust sandwich covariance H^-1 B H^-1 where H is the central
// finite-difference Jacobian of the analytic gradient and B the sum of
// per-observation score outer products. H is inverted on its numerically
// identified eigenspace; the congruence keeps the result PSD.
template <typename GradFn, typename ScoresFn>
SandwichResult sandwich_covariance(const Vector& theta,
                                   const std::vector<std::string>& names,
                                   const GradFn& gradient_at,
                                   const ScoresFn& accumulate_scores) {
  const std::size_t k = theta.size();

  Matrix b(k, k, 0.0);
  accumulate_scores(b);

  Matrix hess(k, k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta[j]));
    Vector tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    const Vector gp = gradient_at(tp);
    const Vector gm = gradient_at(tm);
    for (std::size_t i = 0; i < k; ++i) {
      hess(i, j) = (gp[i] - gm[i]) / (2.0 * h);
    }
  }
  hess.symmetrize();

  // eigendecompose -H (positive semidefinite up to noise for a concave LL)
  Matrix neg(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) neg(i, j) = -hess(i, j);
  }
  const EigenDecomposition eig = eigen_symmetric(neg);
  double lmax = 0.0;
  for (double l : eig.eigenvalues) lmax = std::max(lmax, l);
  const double floor = std::max(kHessianRankTolerance * lmax, 1e-300);

  SandwichResult out;
  Matrix hinv(k, k, 0.0);  // pseudo-inverse of H (negative semidefinite)
  for (std::size_t e = 0; e < k; ++e) {
    const double lambda = eig.eigenvalues[e];
    if (lambda < floor) {
      ++out.weak_directions;
      // the coefficient loading heaviest on the dropped direction
      std::size_t arg = 0;
      double best = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double w = std::abs(eig.eigenvectors(i, e));
        if (w > best) {
          best = w;
          arg = i;
        }
      }
      out.weak_coefficients.push_back(names[arg]);
      continue;
    }
    const double inv = -1.0 / lambda;
    for (std::size_t i = 0; i < k; ++i) {
      const double vie = eig.eigenvectors(i, e);
      if (vie == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) {
        hinv(i, j) += inv * vie * eig.eigenvectors(j, e);
      }
    }
  }

  Matrix cov = matmul(matmul(hinv, b), hinv);
  cov.symmetrize();
  out.covariance = std::move(cov);
  return out;
}

inline void finish_result(EstimationResult& res, const Vector& theta,
                          const SandwichResult& sw) {
  res.values = theta;
  res.robust_covariance = sw.covariance;
  const std::size_t k = theta.size();
  res.robust_se.assign(k, 0.0);
  res.robust_t.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    res.robust_se[j] = std::sqrt(std::max(sw.covariance(j, j), 0.0));
    res.robust_t[j] =
        res.robust_se[j] > 0.0 ? theta[j] / res.robust_se[j] : 0.0;
  }
  if (sw.weak_directions > 0) {
    std::string names;
    for (const std::string& n : sw.weak_coefficients) {
      if (!names.empty()) names += ", ";
      names += n;
    }
    res.warnings.push_back(
        "hessian is singular to working precision in " +
        std::to_string(sw.weak_directions) +
        " direction(s); affected coefficients are not separately "
        "identified (heaviest loadings: " +
        names + ")");
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (std::abs(theta[j]) > 50.0) {
      res.warnings.push_back("possible separation: |" + res.names[j] +
                             "| exceeds 50 in scaled space");
    }
  }
}

inline void check_identifiable(const DesignMatrix& x, const ModelSpec& spec) {
  for (const Term& t : spec.terms) {
    if (spec.is_fixed(t.coefficient)) continue;
    std::size_t cells = 0;
    for (std::size_t q = 0; q < x.n_obs && cells == 0; ++q) {
      for (Mode m : kAllModes) {
        if (t.modes[mode_index(m)] && x.is_available(q, m)) {
          ++cells;
          break;
        }
      }
    }
    if (cells == 0) {
      throw SpecError("coefficient '" + t.coefficient +
                      "' applies to zero available cells");
    }
  }
}

}  // namespace detail

// Maximum-likelihood estimation of a multinomial logit specification with
// robust (sandwich) covariance. Starts from zero; the log-likelihood is
// globally concave so the start affects only the iteration count.
inline EstimationResult estimate(const Dataset& d, const DesignMatrix& x,
                                 const ModelSpec& spec,
                                 const OptimizerOptions& opts = {}) {
  spec.validate();
  detail::check_identifiable(x, spec);
  const CompiledSpec cs = compile_spec(spec);
  const unsigned threads = resolve_threads(opts.threads);
  const std::size_t k = cs.n_free();

  EstimationResult res;
  res.model_id = spec.id;
  res.names = cs.names;
  res.sample_size = static_cast<int>(d.size());
  res.n_parameters = static_cast<int>(k);
  res.ll_null = null_log_likelihood(d, x);

  auto objective = [&](const Vector& beta, double& value, Vector& grad) {
    const LogLikResult ll = log_likelihood(d, x, beta, cs, threads);
    value = ll.value;
    grad = ll.gradient;
  };
  const OptimizeOutcome opt = maximize(objective, Vector(k, 0.0), opts);

  res.ll_final = opt.value;
  res.converged = opt.converged;
  res.iterations = opt.iterations;
  res.gradient_norm_at_solution = opt.gradient_norm;
  if (!opt.converged) {
    res.warnings.push_back("optimizer did not converge: " + opt.message);
  }
  res.adjusted_rho_sq =
      fit_statistics(res.ll_null, res.ll_final, res.n_parameters);

  auto gradient_at = [&](const Vector& beta) {
    return log_likelihood(d, x, beta, cs, threads).gradient;
  };
  auto accumulate_scores = [&](Matrix& b) {
    Vector score(k);
    for (std::size_t q = 0; q < d.size(); ++q) {
      std::fill(score.begin(), score.end(), 0.0);
      detail::obs_log_prob_and_score(x, q, d[q].chosen_mode, opt.x, cs,
                                     score.data());
      for (std::size_t i = 0; i < k; ++i) {
        if (score[i] == 0.0) continue;
        for (std::size_t j = 0; j < k; ++j) b(i, j) += score[i] * score[j];
      }
    }
  };
  const detail::SandwichResult sw = detail::sandwich_covariance(
      opt.x, cs.names, gradient_at, accumulate_scores);
  detail::finish_result(res, opt.x, sw);
  return res;
}

}  // namespace detour
