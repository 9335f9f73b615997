#pragma once

// Test-side reference values computed independently of the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline double upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double linf_gaussian(int d, double t) { return std::sqrt(2 * M_E * (std::log(2.0 * d) + t)); }

inline double euclid_reference(double trace, double op, double t) {
  return std::sqrt(trace) + std::sqrt(2 * t * op);
}

inline double gaussian_limit(double eta, double trace, double op, double t) {
  return 4 * std::exp(0.5) * eta * std::sqrt(3 * trace + 2 / (3 * std::log(2.0)) * op * t);
}

// E|g|^p by composite Simpson on [-L, L].
inline double gaussian_abs_moment(double p) {
  const int n = 200000;
  const double L = 40, h = 2 * L / n;
  double s = 0;
  for (int i = 0; i <= n; ++i) {
    const double x = -L + i * h;
    const double f = std::pow(std::fabs(x), p) * std::exp(-0.5 * x * x);
    s += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
  }
  return s * h / 3 / std::sqrt(2 * M_PI);
}

// sup over a uniform q-grid of p·q·(n/p)^{1/q} on [max(2, p/n), p].
inline double cnp_grid(int n, double p, int points) {
  const double lo = std::max(2.0, p / n);
  double best = 0;
  for (int i = 0; i < points; ++i) {
    const double q = lo + (p - lo) * i / (points - 1);
    best = std::max(best, p * q * std::pow(n / p, 1 / q));
  }
  return best;
}

// Level-a quantile of max_i |g_i| over d standard Gaussians, by bisection on
// (1 - 2 Phi(-x))^d = a.
inline double max_abs_gaussian_quantile(int d, double a) {
  double lo = 0, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (d * std::log1p(-2 * upper_tail(mid)) < std::log(a) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double nu_gaussian_euclid(double kappa) { return 1 / (2 * upper_tail(1 / kappa)); }

// Quantile of Exp(1) at level a.
inline double exp_quantile(double a) { return -std::log1p(-a); }

// 2 max_i σ_i √log(i+1) + √2 σ₁, i one-based.
inline double hetero_closed(const std::vector<double>& s) {
  double ss = 0;
  for (std::size_t i = 0; i < s.size(); ++i) ss = std::max(ss, s[i] * std::sqrt(std::log(i + 2.0)));
  return 2 * ss + std::sqrt(2.0) * s[0];
}

}  // namespace oracle
