#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "detour/error.hpp"
#include "detour/model_spec.hpp"

namespace detour {

// Prime bases for the Halton sequence, one per mixing dimension.
inline constexpr std::array<int, 64> kPrimeBases = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,
    43,  47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101,
    103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167,
    173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

// Radical-inverse (van der Corput) value of `index` in the given base.
// index starts at 1: halton(2, 1..3) = 1/2, 1/4, 3/4.
inline double halton(int base, std::uint64_t index) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
  }
  return r;
}

// Inverse standard-normal CDF. Acklam's rational approximation polished by
// one Halley step; accurate to full double precision over (0, 1).
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ArgumentError("inverse_normal_cdf: p must lie in (0, 1)");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Halley refinement against the exact CDF via erfc
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

// Standard-normal draws for simulated likelihood, fixed per observation
// across optimizer iterations. Layout: [obs][draw][dim].
struct DrawTensor {
  std::size_t n_obs = 0;
  std::size_t n_draws = 0;
  std::size_t n_dims = 0;
  std::vector<double> z;

  double at(std::size_t obs, std::size_t draw, std::size_t dim) const {
    return z[(obs * n_draws + draw) * n_dims + dim];
  }
};

// Number of leading Halton points skipped; the early points of every base
// are strongly correlated across dimensions.
inline constexpr std::uint64_t kHaltonSkip = 10;

inline DrawTensor make_draws(std::size_t n_obs, std::size_t n_draws,
                             std::size_t n_dims, DrawType type,
                             std::uint64_t seed) {
  if (n_obs == 0 || n_draws == 0 || n_dims == 0) {
    throw ArgumentError("make_draws: sizes must be positive");
  }
  if (n_dims > kPrimeBases.size()) {
    throw ArgumentError("make_draws: at most " +
                        std::to_string(kPrimeBases.size()) +
                        " mixing dimensions supported");
  }
  DrawTensor t;
  t.n_obs = n_obs;
  t.n_draws = n_draws;
  t.n_dims = n_dims;
  t.z.resize(n_obs * n_draws * n_dims);

  if (type == DrawType::halton) {
    // dimension d walks the base-p_d sequence; each observation consumes a
    // consecutive block of n_draws points
    for (std::size_t q = 0; q < n_obs; ++q) {
      for (std::size_t r = 0; r < n_draws; ++r) {
        const std::uint64_t index = kHaltonSkip + q * n_draws + r + 1;
        for (std::size_t d = 0; d < n_dims; ++d) {
          t.z[(q * n_draws + r) * n_dims + d] =
              inverse_normal_cdf(halton(kPrimeBases[d], index));
        }
      }
    }
  } else {
    // mt19937_64 has a portable, standard-specified stream
    std::mt19937_64 rng(seed);
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    for (double& v : t.z) {
      const double u = (static_cast<double>(rng() >> 11) + 0.5) * kScale;
      v = inverse_normal_cdf(u);
    }
  }
  return t;
}

}  // namespace detour
