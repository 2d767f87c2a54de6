#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "detour/draws.hpp"
#include "detour/estimate.hpp"
#include "detour/mnl.hpp"

namespace detour {

namespace detail {

// Effective coefficient vector for one draw: mixed coefficients become
// mean + sigma * z.
inline void apply_draw(const CompiledSpec& cs, const Vector& theta,
                       const DrawTensor& draws, std::size_t obs,
                       std::size_t draw, Vector& beta_eff) {
  beta_eff = theta;
  for (const CompiledSpec::MixedTerm& mt : cs.mixed) {
    const CompiledTerm& t = cs.terms[mt.term];
    if (t.param < 0) continue;
    const double z = draws.at(obs, draw, mt.dimension);
    beta_eff[t.param] = theta[t.param] + theta[mt.sigma_param] * z;
  }
}

// Simulated log-probability of the chosen mode for one observation,
// optionally with the score of the simulated log-likelihood. Uses
// log-sum-exp over draws so extreme utilities cannot underflow.
inline double obs_simulated_log_prob(const DesignMatrix& x, std::size_t obs,
                                     Mode chosen, const Vector& theta,
                                     const CompiledSpec& cs,
                                     const DrawTensor& draws, double* score,
                                     Vector& beta_scratch,
                                     std::vector<double>& logp_scratch,
                                     std::vector<Vector>& score_scratch) {
  const std::size_t r_count = draws.n_draws;
  const std::size_t k = cs.n_free();
  logp_scratch.resize(r_count);
  if (score != nullptr) {
    score_scratch.resize(r_count);
  }

  ModeMask avail{};
  for (Mode m : kAllModes) avail[mode_index(m)] = x.is_available(obs, m);

  for (std::size_t r = 0; r < r_count; ++r) {
    apply_draw(cs, theta, draws, obs, r, beta_scratch);
    const ModeArray v = utilities_compiled(x, obs, beta_scratch, cs);
    const ModeArray p = choice_probabilities(v, avail);
    logp_scratch[r] = std::log(p[mode_index(chosen)]);
    if (score != nullptr) {
      Vector& s = score_scratch[r];
      s.assign(k, 0.0);
      for (std::size_t ti = 0; ti < cs.terms.size(); ++ti) {
        const CompiledTerm& t = cs.terms[ti];
        if (t.param < 0) continue;
        double g = 0.0;
        for (Mode m : kAllModes) {
          const int i = mode_index(m);
          if (!t.modes[i] || !avail[i]) continue;
          const double indicator = (m == chosen) ? 1.0 : 0.0;
          g += (indicator - p[i]) * x.at(obs, m, t.attribute);
        }
        s[t.param] += g;
      }
      // sigma scores: the chain rule multiplies the base score by the draw
      for (const CompiledSpec::MixedTerm& mt : cs.mixed) {
        const CompiledTerm& t = cs.terms[mt.term];
        if (t.param < 0) continue;
        s[mt.sigma_param] = s[t.param] * draws.at(obs, r, mt.dimension);
      }
    }
  }

  double lmax = -std::numeric_limits<double>::infinity();
  for (double lp : logp_scratch) lmax = std::max(lmax, lp);
  double sum = 0.0;
  for (double lp : logp_scratch) sum += std::exp(lp - lmax);
  const double log_mean =
      lmax + std::log(sum) - std::log(static_cast<double>(r_count));

  if (score != nullptr) {
    // d log( (1/R) sum_r P_r ) = sum_r w_r * score_r, w_r = P_r / sum P_r
    for (std::size_t r = 0; r < r_count; ++r) {
      const double w = std::exp(logp_scratch[r] - lmax) / sum;
      if (w == 0.0) continue;
      const Vector& s = score_scratch[r];
      for (std::size_t j = 0; j < k; ++j) score[j] += w * s[j];
    }
  }
  return log_mean;
}

}  // namespace detail

// Draw-averaged choice probabilities for one observation (Monte Carlo
// evaluation of the mixture integral). With every sigma zero this equals
// the plain MNL probabilities exactly.
inline ModeArray simulated_probability(const DesignMatrix& x, std::size_t obs,
                                       const Vector& theta,
                                       const CompiledSpec& cs,
                                       const DrawTensor& draws) {
  if (draws.n_draws == 0) throw ArgumentError("simulated_probability: no draws");
  ModeMask avail{};
  for (Mode m : kAllModes) avail[mode_index(m)] = x.is_available(obs, m);
  ModeArray acc{};
  Vector beta_eff;
  for (std::size_t r = 0; r < draws.n_draws; ++r) {
    detail::apply_draw(cs, theta, draws, obs, r, beta_eff);
    const ModeArray v = utilities_compiled(x, obs, beta_eff, cs);
    const ModeArray p = choice_probabilities(v, avail);
    for (Mode m : kAllModes) acc[mode_index(m)] += p[mode_index(m)];
  }
  for (Mode m : kAllModes) {
    acc[mode_index(m)] /= static_cast<double>(draws.n_draws);
  }
  return acc;
}

inline ModeArray simulated_probability(const DesignMatrix& x, std::size_t obs,
                                       const ParameterVector& beta,
                                       const ModelSpec& spec,
                                       const DrawTensor& draws) {
  const CompiledSpec cs = compile_spec(spec);
  Vector b(cs.n_free());
  for (std::size_t i = 0; i < cs.n_free(); ++i) b[i] = beta.get(cs.names[i]);
  return simulated_probability(x, obs, b, cs, draws);
}

// Simulated log-likelihood and gradient; draws are fixed per observation,
// so the objective is a smooth deterministic function of the parameters.
inline LogLikResult simulated_log_likelihood(const Dataset& d,
                                             const DesignMatrix& x,
                                             const Vector& theta,
                                             const CompiledSpec& cs,
                                             const DrawTensor& draws,
                                             unsigned threads = 1) {
  if (d.size() != x.n_obs || draws.n_obs != d.size()) {
    throw ArgumentError("dataset, matrix and draws sizes differ");
  }
  const std::size_t n_chunks = chunk_count(d.size());
  const std::size_t k = cs.n_free();
  std::vector<double> chunk_ll(n_chunks, 0.0);
  std::vector<Vector> chunk_grad(n_chunks, Vector(k, 0.0));

  parallel_chunks(
      d.size(), threads,
      [&](std::size_t c, std::size_t begin, std::size_t end) {
        Vector beta_scratch;
        std::vector<double> logp_scratch;
        std::vector<Vector> score_scratch;
        for (std::size_t q = begin; q < end; ++q) {
          detail::check_finite_cell(x, q);
          chunk_ll[c] += detail::obs_simulated_log_prob(
              x, q, d[q].chosen_mode, theta, cs, draws, chunk_grad[c].data(),
              beta_scratch, logp_scratch, score_scratch);
        }
      });

  LogLikResult out;
  out.gradient.assign(k, 0.0);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    out.value += chunk_ll[c];
    for (std::size_t j = 0; j < k; ++j) out.gradient[j] += chunk_grad[c][j];
  }
  return out;
}

// Maximum simulated likelihood for a mixture-of-logit specification.
// Starts from the plain-MNL solution with every sigma at 0.1. The null
// log-likelihood is evaluated at zero coefficients and zero sigmas, which
// collapses to equal shares over each observation's choice set.
inline EstimationResult estimate_mixed(const Dataset& d, const DesignMatrix& x,
                                       const ModelSpec& spec,
                                       const OptimizerOptions& opts = {}) {
  spec.validate();
  if (spec.mixing.empty()) return estimate(d, x, spec, opts);
  detail::check_identifiable(x, spec);

  // stage 1: plain MNL on the same terms
  ModelSpec plain = spec;
  plain.mixing.clear();
  const EstimationResult mnl_res = estimate(d, x, plain, opts);

  const CompiledSpec cs = compile_spec(spec);
  const unsigned threads = resolve_threads(opts.threads);
  const std::size_t k = cs.n_free();
  const std::size_t k_base = mnl_res.names.size();

  Vector start(k, 0.1);  // sigmas default to 0.1
  for (std::size_t i = 0; i < k_base; ++i) start[i] = mnl_res.values[i];

  const DrawTensor draws = make_draws(d.size(), spec.draws.count,
                                      cs.mixed.size(), spec.draws.type,
                                      spec.draws.seed);

  EstimationResult res;
  res.model_id = spec.id;
  res.names = cs.names;
  res.sample_size = static_cast<int>(d.size());
  res.n_parameters = static_cast<int>(k);
  res.ll_null = null_log_likelihood(d, x);
  res.draw_count = spec.draws.count;
  res.draw_type = spec.draws.type;
  res.draw_seed = spec.draws.seed;

  auto objective = [&](const Vector& theta, double& value, Vector& grad) {
    const LogLikResult ll =
        simulated_log_likelihood(d, x, theta, cs, draws, threads);
    value = ll.value;
    grad = ll.gradient;
  };
  const OptimizeOutcome opt = maximize(objective, start, opts);

  res.ll_final = opt.value;
  res.converged = opt.converged;
  res.iterations = opt.iterations;
  res.gradient_norm_at_solution = opt.gradient_norm;
  if (!opt.converged) {
    res.warnings.push_back("optimizer did not converge: " + opt.message);
  }
  res.adjusted_rho_sq =
      fit_statistics(res.ll_null, res.ll_final, res.n_parameters);

  auto gradient_at = [&](const Vector& theta) {
    return simulated_log_likelihood(d, x, theta, cs, draws, threads).gradient;
  };
  auto accumulate_scores = [&](Matrix& b) {
    Vector score(k);
    Vector beta_scratch;
    std::vector<double> logp_scratch;
    std::vector<Vector> score_scratch;
    for (std::size_t q = 0; q < d.size(); ++q) {
      std::fill(score.begin(), score.end(), 0.0);
      detail::obs_simulated_log_prob(x, q, d[q].chosen_mode, opt.x, cs, draws,
                                     score.data(), beta_scratch, logp_scratch,
                                     score_scratch);
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
