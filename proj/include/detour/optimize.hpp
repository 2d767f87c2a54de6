#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include "detour/linalg.hpp"

namespace detour {

struct OptimizerOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;  // max-norm on the objective gradient
  int threads = 0;                   // 0 = resolve from env / hardware
};

struct OptimizeOutcome {
  Vector x;
  double value = 0.0;        // objective at x (the function being maximized)
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

// Maximizes f via BFGS (inverse-Hessian form) with a backtracking Armijo
// line search. f returns the objective value and gradient. The first step
// is normalized by the gradient magnitude and the initial inverse Hessian
// is rescaled after the first update (Nocedal & Wright, eq. 6.20), which
// handles badly scaled likelihoods without tuning.
inline OptimizeOutcome maximize(
    const std::function<void(const Vector&, double&, Vector&)>& f,
    const Vector& x0, const OptimizerOptions& opts) {
  const std::size_t n = x0.size();
  OptimizeOutcome out;
  out.x = x0;

  double fx = 0.0;
  Vector gx(n, 0.0);
  f(out.x, fx, gx);

  Matrix h = Matrix::identity(n);  // approximate inverse Hessian of -f
  bool first_update = true;
  constexpr double kArmijo = 1e-4;

  for (int it = 0; it < opts.max_iterations; ++it) {
    out.iterations = it;
    out.gradient_norm = max_abs(gx);
    if (out.gradient_norm < opts.gradient_tolerance) {
      out.converged = true;
      out.value = fx;
      return out;
    }

    // ascent direction p = H g
    Vector p = matvec(h, gx);
    double gtp = dot(gx, p);
    if (!(gtp > 0.0) || !std::isfinite(gtp)) {
      h = Matrix::identity(n);
      first_update = true;
      p = gx;
      gtp = dot(gx, gx);
    }

    // keep the very first trial step at unit scale in parameter space
    double alpha = 1.0;
    if (it == 0) {
      const double pmax = max_abs(p);
      if (pmax > 1.0) alpha = 1.0 / pmax;
    }

    double fnew = fx;
    Vector xnew(n), gnew(n, 0.0);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xnew[i] = out.x[i] + alpha * p[i];
      Vector gtrial(n, 0.0);
      double ftrial = 0.0;
      f(xnew, ftrial, gtrial);
      if (std::isfinite(ftrial) && ftrial >= fx + kArmijo * alpha * gtp) {
        fnew = ftrial;
        gnew = std::move(gtrial);
        accepted = true;
        break;
      }
      alpha *= 0.5;
      if (alpha < 1e-20) break;
    }
    if (!accepted) {
      out.value = fx;
      out.gradient_norm = max_abs(gx);
      out.message = "line search failed";
      return out;
    }

    Vector s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = alpha * p[i];
      y[i] = gx[i] - gnew[i];  // gradient change of -f
    }
    const double ys = dot(y, s);
    const double yy = dot(y, y);
    if (ys > 1e-12 * std::sqrt(dot(s, s)) * std::sqrt(yy)) {
      if (first_update) {
        const double scale = ys / yy;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.0;
          h(i, i) = scale;
        }
        first_update = false;
      }
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      const double rho = 1.0 / ys;
      const Vector hy = matvec(h, y);
      const double yhy = dot(y, hy);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h(i, j) += rho * rho * yhy * s[i] * s[j] -
                     rho * (s[i] * hy[j] + hy[i] * s[j]) +
                     rho * s[i] * s[j];
        }
      }
    }

    out.x = std::move(xnew);
    fx = fnew;
    gx = std::move(gnew);
  }

  out.value = fx;
  out.gradient_norm = max_abs(gx);
  out.iterations = opts.max_iterations;
  out.message = "maximum iterations reached";
  return out;
}

}  // namespace detour
