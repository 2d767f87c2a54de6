#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "detour/dataset.hpp"
#include "detour/error.hpp"
#include "detour/linalg.hpp"
#include "detour/model_spec.hpp"
#include "detour/parallel.hpp"
#include "detour/synthesis.hpp"

namespace detour {

// Spec resolved against a parameter layout: per term the attribute slot and
// the free-parameter index (or the pinned value).
struct CompiledTerm {
  int attribute = 0;
  ModeMask modes{};
  int param = -1;      // index into the free parameter vector; -1 if fixed
  double fixed = 0.0;  // value used when param < 0
};

struct CompiledSpec {
  std::vector<CompiledTerm> terms;
  std::vector<std::string> names;  // free parameter names, layout order
  // mixing: per mixed term, the sigma parameter index and the draw dimension
  struct MixedTerm {
    std::size_t term = 0;
    int sigma_param = -1;
    int dimension = 0;
  };
  std::vector<MixedTerm> mixed;

  std::size_t n_free() const { return names.size(); }
};

inline CompiledSpec compile_spec(const ModelSpec& spec) {
  spec.validate();
  CompiledSpec cs;
  cs.names = spec.free_coefficients();
  auto index_of = [&cs](const std::string& name) {
    for (std::size_t i = 0; i < cs.names.size(); ++i) {
      if (cs.names[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  for (const Term& t : spec.terms) {
    CompiledTerm ct;
    ct.attribute = attribute_index(t.attribute);
    ct.modes = t.modes;
    if (spec.is_fixed(t.coefficient)) {
      ct.param = -1;
      ct.fixed = spec.fixed.at(t.coefficient);
    } else {
      ct.param = index_of(t.coefficient);
    }
    cs.terms.push_back(ct);
  }
  int dim = 0;
  for (std::size_t ti = 0; ti < spec.terms.size(); ++ti) {
    auto it = spec.mixing.find(spec.terms[ti].coefficient);
    if (it == spec.mixing.end()) continue;
    CompiledSpec::MixedTerm mt;
    mt.term = ti;
    mt.sigma_param = index_of(it->second.sigma_coefficient);
    mt.dimension = dim++;
    cs.mixed.push_back(mt);
  }
  return cs;
}

// Deterministic utilities for one observation. Unavailable modes keep a
// sentinel of -inf purely as a local convention; callers must consult the
// availability mask.
inline ModeArray utilities_compiled(const DesignMatrix& x, std::size_t obs,
                                    const Vector& beta,
                                    const CompiledSpec& cs) {
  ModeArray v{};
  for (const CompiledTerm& t : cs.terms) {
    const double coef = t.param >= 0 ? beta[t.param] : t.fixed;
    if (coef == 0.0) continue;
    for (Mode m : kAllModes) {
      const int i = mode_index(m);
      if (t.modes[i]) v[i] += coef * x.at(obs, m, t.attribute);
    }
  }
  return v;
}

// Public entry matching the spec's operation signature. Throws if `beta`
// is missing a coefficient the spec needs.
inline std::vector<std::pair<Mode, double>> utilities(
    const DesignMatrix& x, std::size_t obs, const ParameterVector& beta,
    const ModelSpec& spec) {
  CompiledSpec cs = compile_spec(spec);
  Vector b(cs.n_free());
  for (std::size_t i = 0; i < cs.n_free(); ++i) b[i] = beta.get(cs.names[i]);
  const ModeArray v = utilities_compiled(x, obs, b, cs);
  std::vector<std::pair<Mode, double>> out;
  for (Mode m : kAllModes) {
    if (x.is_available(obs, m)) out.emplace_back(m, v[mode_index(m)]);
  }
  return out;
}

// Softmax over the available modes with max subtraction. Probabilities of
// unavailable modes are zero.
inline ModeArray choice_probabilities(const ModeArray& v, const ModeMask& avail) {
  std::size_t n_avail = 0;
  double vmax = -std::numeric_limits<double>::infinity();
  for (Mode m : kAllModes) {
    const int i = mode_index(m);
    if (!avail[i]) continue;
    ++n_avail;
    if (v[i] > vmax) vmax = v[i];
    if (!std::isfinite(v[i])) {
      throw DataError("non-finite utility for mode " +
                      std::string(mode_name(m)));
    }
  }
  if (n_avail < 2) {
    throw ArgumentError("degenerate choice set: fewer than 2 alternatives");
  }
  ModeArray p{};
  double denom = 0.0;
  for (Mode m : kAllModes) {
    const int i = mode_index(m);
    if (!avail[i]) continue;
    p[i] = std::exp(v[i] - vmax);
    denom += p[i];
  }
  for (Mode m : kAllModes) {
    const int i = mode_index(m);
    if (avail[i]) p[i] /= denom;
  }
  return p;
}

// Convenience overload on a map-like utility list.
inline std::vector<std::pair<Mode, double>> choice_probabilities(
    const std::vector<std::pair<Mode, double>>& v) {
  ModeArray util{};
  ModeMask avail{};
  for (const auto& [m, value] : v) {
    util[mode_index(m)] = value;
    avail[mode_index(m)] = true;
  }
  const ModeArray p = choice_probabilities(util, avail);
  std::vector<std::pair<Mode, double>> out;
  for (const auto& [m, value] : v) out.emplace_back(m, p[mode_index(m)]);
  return out;
}

namespace detail {

inline void check_finite_cell(const DesignMatrix& x, std::size_t obs) {
  for (Mode m : kAllModes) {
    for (std::size_t a = 0; a < kAttributeCount; ++a) {
      const double value = x.at(obs, m, static_cast<int>(a));
      if (!std::isfinite(value)) {
        throw DataError("non-finite attribute '" +
                        std::string(kAttributeNames[a]) + "' at observation " +
                        std::to_string(obs) + ", mode " +
                        std::string(mode_name(m)));
      }
    }
  }
}

// Per-observation log-probability of the chosen mode and the score vector
// (gradient contribution), computed in one pass.
inline double obs_log_prob_and_score(const DesignMatrix& x, std::size_t obs,
                                     Mode chosen, const Vector& beta,
                                     const CompiledSpec& cs, double* score) {
  const ModeArray v = utilities_compiled(x, obs, beta, cs);
  ModeMask avail{};
  for (Mode m : kAllModes) avail[mode_index(m)] = x.is_available(obs, m);
  const ModeArray p = choice_probabilities(v, avail);
  if (score != nullptr) {
    for (const CompiledTerm& t : cs.terms) {
      if (t.param < 0) continue;
      double g = 0.0;
      for (Mode m : kAllModes) {
        const int i = mode_index(m);
        if (!t.modes[i] || !avail[i]) continue;
        const double indicator = (m == chosen) ? 1.0 : 0.0;
        g += (indicator - p[i]) * x.at(obs, m, t.attribute);
      }
      score[t.param] += g;
    }
  }
  return std::log(p[mode_index(chosen)]);
}

}  // namespace detail

struct LogLikResult {
  double value = 0.0;
  Vector gradient;
};

// Log-likelihood and analytic gradient in one pass, data-parallel over
// observations with an ordered chunk reduction (bit-identical across
// thread counts).
inline LogLikResult log_likelihood(const Dataset& d, const DesignMatrix& x,
                                   const Vector& beta, const CompiledSpec& cs,
                                   unsigned threads = 1) {
  if (d.size() != x.n_obs) {
    throw ArgumentError("dataset and design matrix sizes differ");
  }
  const std::size_t n_chunks = chunk_count(d.size());
  const std::size_t k = cs.n_free();
  std::vector<double> chunk_ll(n_chunks, 0.0);
  std::vector<Vector> chunk_grad(n_chunks, Vector(k, 0.0));

  parallel_chunks(d.size(), threads,
                  [&](std::size_t c, std::size_t begin, std::size_t end) {
                    for (std::size_t q = begin; q < end; ++q) {
                      detail::check_finite_cell(x, q);
                      chunk_ll[c] += detail::obs_log_prob_and_score(
                          x, q, d[q].chosen_mode, beta, cs,
                          chunk_grad[c].data());
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

inline LogLikResult log_likelihood(const Dataset& d, const DesignMatrix& x,
                                   const ParameterVector& beta,
                                   const ModelSpec& spec,
                                   unsigned threads = 1) {
  CompiledSpec cs = compile_spec(spec);
  Vector b(cs.n_free());
  for (std::size_t i = 0; i < cs.n_free(); ++i) b[i] = beta.get(cs.names[i]);
  return log_likelihood(d, x, b, cs, threads);
}

// Equal-shares log-likelihood over each observation's available choice set
// (all coefficients zero).
inline double null_log_likelihood(const Dataset& d, const DesignMatrix& x) {
  double ll = 0.0;
  for (std::size_t q = 0; q < d.size(); ++q) {
    ll -= std::log(static_cast<double>(x.choice_set_size(q)));
  }
  return ll;
}

}  // namespace detour
