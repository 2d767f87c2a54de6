#pragma once

// Independent verification oracles. Everything in this header evaluates
// choice probabilities through its own straight-line code on purpose: it
// must not share any probability or likelihood path with mnl.hpp or
// mixed.hpp, so agreement between the two is meaningful evidence.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "detour/dataset.hpp"
#include "detour/error.hpp"
#include "detour/model_spec.hpp"
#include "detour/synthesis.hpp"

namespace detour {

struct GridRange {
  std::string coefficient;
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};

struct GridMleResult {
  std::vector<std::string> names;
  std::vector<double> values;
  double ll = 0.0;
  bool on_boundary = false;
};

namespace oracle_detail {

// Plain softmax log-likelihood, written independently of the estimator.
inline double grid_log_likelihood(const Dataset& d, const DesignMatrix& x,
                                  const ModelSpec& spec,
                                  const std::vector<std::string>& names,
                                  const std::vector<double>& values) {
  double ll = 0.0;
  for (std::size_t q = 0; q < d.size(); ++q) {
    double v[kModeCount];
    for (std::size_t m = 0; m < kModeCount; ++m) v[m] = 0.0;
    for (const Term& t : spec.terms) {
      double coef = 0.0;
      if (spec.is_fixed(t.coefficient)) {
        coef = spec.fixed.at(t.coefficient);
      } else {
        for (std::size_t j = 0; j < names.size(); ++j) {
          if (names[j] == t.coefficient) {
            coef = values[j];
            break;
          }
        }
      }
      const int attr = attribute_index(t.attribute);
      for (std::size_t m = 0; m < kModeCount; ++m) {
        if (t.modes[m]) {
          v[m] += coef * x.at(q, static_cast<Mode>(m), attr);
        }
      }
    }
    double vmax = -1e300;
    for (std::size_t m = 0; m < kModeCount; ++m) {
      if (x.is_available(q, static_cast<Mode>(m)) && v[m] > vmax) vmax = v[m];
    }
    double denom = 0.0;
    for (std::size_t m = 0; m < kModeCount; ++m) {
      if (x.is_available(q, static_cast<Mode>(m))) {
        denom += std::exp(v[m] - vmax);
      }
    }
    const int ch = mode_index(d[q].chosen_mode);
    ll += v[ch] - vmax - std::log(denom);
  }
  return ll;
}

}  // namespace oracle_detail

// Exhaustive grid search over at most two free coefficients, maximizing the
// same log-likelihood through an independent reimplementation. Coefficients
// not covered by a range are held at zero. Flags an argmax sitting on a
// grid boundary, which means the ranges failed to bracket the optimum.
inline GridMleResult grid_mle(const Dataset& d, const DesignMatrix& x,
                              const ModelSpec& spec,
                              const std::vector<GridRange>& ranges) {
  if (ranges.empty() || ranges.size() > 2) {
    throw ArgumentError("grid_mle supports 1 or 2 free parameters");
  }
  for (const GridRange& r : ranges) {
    if (!(r.step > 0.0) || !(r.hi > r.lo)) {
      throw ArgumentError("grid_mle: malformed range for " + r.coefficient);
    }
  }
  GridMleResult best;
  for (const GridRange& r : ranges) best.names.push_back(r.coefficient);
  best.values.assign(ranges.size(), 0.0);
  best.ll = -1e300;

  const auto steps_of = [](const GridRange& r) {
    return static_cast<std::size_t>(std::floor((r.hi - r.lo) / r.step + 0.5)) +
           1;
  };
  std::vector<double> point(ranges.size(), 0.0);
  std::vector<std::size_t> best_idx(ranges.size(), 0);
  const std::size_t n0 = steps_of(ranges[0]);
  const std::size_t n1 = ranges.size() == 2 ? steps_of(ranges[1]) : 1;
  for (std::size_t i = 0; i < n0; ++i) {
    point[0] = ranges[0].lo + static_cast<double>(i) * ranges[0].step;
    for (std::size_t j = 0; j < n1; ++j) {
      if (ranges.size() == 2) {
        point[1] = ranges[1].lo + static_cast<double>(j) * ranges[1].step;
      }
      const double ll =
          oracle_detail::grid_log_likelihood(d, x, spec, best.names, point);
      if (ll > best.ll) {
        best.ll = ll;
        best.values = point;
        best_idx[0] = i;
        if (ranges.size() == 2) best_idx[1] = j;
      }
    }
  }
  best.on_boundary = best_idx[0] == 0 || best_idx[0] == n0 - 1 ||
                     (ranges.size() == 2 &&
                      (best_idx[1] == 0 || best_idx[1] == n1 - 1));
  return best;
}

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Hermite nodes and weights (physicists' convention, weight e^{-x^2})
// by Newton iteration on the recurrence.
inline GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw ArgumentError("gauss_hermite: need at least one node");
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-14) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

// One observation of a toy mixture problem with a single normally mixed
// coefficient applying to one attribute column.
struct MixedToy {
  std::size_t n_modes = 2;
  std::vector<double> base_utility;  // fixed part of each mode's utility
  std::vector<double> mixed_x;       // attribute multiplied by the mixed coef
  double mean = 0.0;                 // mixing mean
  double sigma = 0.0;                // mixing standard deviation
  std::size_t target_mode = 0;
};

// Deterministic Gauss-Hermite evaluation of the mixture probability
// integral for the toy problem above.
inline double quadrature_mixed_probability(const MixedToy& toy, int nodes) {
  if (nodes < 1) throw ArgumentError("quadrature needs at least one node");
  if (toy.base_utility.size() != toy.n_modes ||
      toy.mixed_x.size() != toy.n_modes) {
    throw ArgumentError("quadrature_mixed_probability: inconsistent toy");
  }
  const GaussHermiteRule rule = gauss_hermite(nodes);
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double beta =
        toy.mean + toy.sigma * std::sqrt(2.0) * rule.nodes[i];
    double vmax = -1e300;
    for (std::size_t m = 0; m < toy.n_modes; ++m) {
      const double v = toy.base_utility[m] + beta * toy.mixed_x[m];
      if (v > vmax) vmax = v;
    }
    double denom = 0.0;
    double num = 0.0;
    for (std::size_t m = 0; m < toy.n_modes; ++m) {
      const double e =
          std::exp(toy.base_utility[m] + beta * toy.mixed_x[m] - vmax);
      denom += e;
      if (m == toy.target_mode) num = e;
    }
    acc += rule.weights[i] * inv_sqrt_pi * (num / denom);
  }
  return acc;
}

}  // namespace detour
