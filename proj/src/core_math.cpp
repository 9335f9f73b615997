#include "tailcert/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tailcert/errors.hpp"

namespace tailcert {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogPi = 1.1447298858494002;
}  // namespace

FactorialValue gamma_factorial(double p) {
  if (!std::isfinite(p) || p < 0) throw DomainError("gamma_factorial: p must be finite and >= 0");
  const double lg = std::lgamma(p + 1.0);
  if (p <= 170.0) return {std::tgamma(p + 1.0), lg, false};
  return {kInf, lg, true};
}

double log_factorial(double p) { return gamma_factorial(p).log_value; }

double log_gaussian_abs_moment(double p) {
  if (!std::isfinite(p) || p < 0) throw DomainError("gaussian_abs_moment: p must be finite and >= 0");
  return 0.5 * p * M_LN2 + std::lgamma(0.5 * (p + 1.0)) - 0.5 * kLogPi;
}

double gaussian_abs_moment(double p) {
  if (p == 0.0) return 1.0;
  if (p == 2.0) return 1.0;
  return std::exp(log_gaussian_abs_moment(p));
}

double gaussian_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double gaussian_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }

double gaussian_cdf_lower(double z) {
  if (!(z >= 0)) throw DomainError("gaussian_cdf_lower: z must be >= 0");
  return 0.25 * std::exp(-2.0 * z * z / 3.0);
}

bool is_symmetric(const Matrix& M, double rel_tol) {
  if (M.rows() != M.cols()) return false;
  const double scale = M.cwiseAbs().maxCoeff();
  if (scale == 0) return true;
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

double log_quadratic_form_moment_bound(const Matrix& B, double p, QuadFormMode mode) {
  if (!(p >= 1) || !std::isfinite(p)) throw DomainError("quadratic_form_moment_bound: p must be >= 1");
  if (B.rows() != B.cols() || B.rows() == 0)
    throw DomainError("quadratic_form_moment_bound: B must be square");
  if (!B.allFinite()) throw DomainError("quadratic_form_moment_bound: non-finite entries");
  if (!is_symmetric(B)) throw DomainError("quadratic_form_moment_bound: B is not symmetric");
  const Matrix S = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  const Vector lam = es.eigenvalues().cwiseAbs();
  const double nuc = lam.sum();
  const double op = lam.maxCoeff();
  if (nuc == 0) return -kInf;
  if (mode == QuadFormMode::simplified) return p * std::log(nuc + p * op);
  double acc = p * std::log(nuc);
  const int fl = static_cast<int>(std::floor(p));
  for (int i = 1; i <= fl; ++i) acc += std::log1p(2.0 * (p - i) * op / nuc);
  return acc;
}

double quadratic_form_moment_bound(const Matrix& B, double p, QuadFormMode mode) {
  return std::exp(log_quadratic_form_moment_bound(B, p, mode));
}

double second_moment_lower(double mean_plus, double sq_plus) {
  if (!std::isfinite(mean_plus) || !std::isfinite(sq_plus) || mean_plus < 0 || sq_plus < 0)
    throw DomainError("second_moment_lower: arguments must be finite and nonnegative");
  if (sq_plus == 0) {
    if (mean_plus > 0) throw InconsistencyError("second_moment_lower: E(ξ-s)₊² = 0 but E(ξ-s)₊ > 0");
    return 0.0;
  }
  const double m2 = mean_plus * mean_plus;
  if (m2 > sq_plus * (1 + 1e-12))
    throw InconsistencyError("second_moment_lower: (E(ξ-s)₊)² exceeds E(ξ-s)₊²");
  return std::min(1.0, m2 / sq_plus);
}

double second_moment_lower_rho(double mean, double variance, double rho) {
  if (!(mean >= 0) || !(variance >= 0) || !(rho >= 0 && rho < 1))
    throw DomainError("second_moment_lower_rho: need mean >= 0, variance >= 0, rho in [0,1)");
  const double a = (1 - rho) * (1 - rho) * mean * mean;
  if (a == 0) return 0.0;
  return a / (variance + a);
}

SpectralStats spectral_stats(const Matrix& M) {
  if (!M.allFinite()) throw DomainError("spectral_stats: non-finite entries");
  SpectralStats s;
  const bool square = M.rows() == M.cols();
  s.trace = square ? M.trace() : std::numeric_limits<double>::quiet_NaN();
  s.frobenius_norm = M.norm();
  if (M.size() == 0) {
    s.effective_rank = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  Vector sv;
  if (square && is_symmetric(M)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    sv = es.eigenvalues().cwiseAbs();
  } else {
    Eigen::BDCSVD<Matrix> svd(M);
    sv = svd.singularValues();
  }
  s.operator_norm = sv.maxCoeff();
  s.nuclear_norm = sv.sum();
  s.effective_rank =
      s.operator_norm > 0 ? s.trace / s.operator_norm : std::numeric_limits<double>::quiet_NaN();
  return s;
}

double log_sum_exp(std::span<const double> v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

namespace {

struct Probe {
  const std::function<double(double)>& f;
  bool log_scale;
  int evaluations = 0;
  int nonfinite = 0;
  double best_u = 0;
  double best_x = 0;
  double best_v = kInf;
  bool have_best = false;

  double x_of(double u) const { return log_scale ? std::exp(u) : u; }

  // x_exact lets the endpoints be probed without an exp(log(.)) round trip.
  double operator()(double u, double x_exact = std::numeric_limits<double>::quiet_NaN()) {
    ++evaluations;
    const double x = std::isnan(x_exact) ? x_of(u) : x_exact;
    double v = f(x);
    if (!std::isfinite(v)) {
      ++nonfinite;
      v = kInf;
    }
    if (!have_best || v < best_v || (v == best_v && u < best_u)) {
      best_u = u;
      best_x = x;
      best_v = v;
      have_best = true;
    }
    return v;
  }
};

}  // namespace

ScalarMinimum minimize_scalar(const std::function<double(double)>& f,
                              const ScalarSearchDomain& d) {
  if (!(d.tolerance > 0)) throw DomainError("minimize_scalar: tolerance must be > 0");
  if (!(d.lo <= d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi))
    throw DomainError("minimize_scalar: need finite lo <= hi");
  if (d.log_scale && !(d.lo > 0)) throw DomainError("minimize_scalar: log scale needs lo > 0");

  Probe probe{f, d.log_scale};
  const double ulo = d.log_scale ? std::log(d.lo) : d.lo;
  const double uhi = d.log_scale ? std::log(d.hi) : d.hi;

  if (ulo == uhi) {
    probe(ulo, d.lo);
  } else {
    const int n = std::max(3, d.coarse_points);
    const double step = (uhi - ulo) / (n - 1);
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) {
      if (i == 0)
        vals[i] = probe(ulo, d.lo);
      else if (i == n - 1)
        vals[i] = probe(uhi, d.hi);
      else
        vals[i] = probe(ulo + i * step);
    }
    int ib = 0;
    for (int i = 1; i < n; ++i)
      if (vals[i] < vals[ib]) ib = i;

    double a = ulo + std::max(0, ib - 1) * step;
    double b = ib + 1 >= n ? uhi : ulo + (ib + 1) * step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a);
    double e = a + gr * (b - a);
    double fc = probe(c);
    double fe = probe(e);
    while (b - a > d.tolerance) {
      if (fc <= fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - gr * (b - a);
        fc = probe(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + gr * (b - a);
        fe = probe(e);
      }
    }

    const double centre = probe.best_u;
    const double half = std::max(b - a, d.tolerance);
    for (int k = 0; k < 17; ++k) {
      const double u = centre - half + k * (2.0 * half / 16.0);
      if (u < ulo || u > uhi) continue;
      probe(u);
    }
  }

  if (probe.nonfinite * 2 > probe.evaluations)
    throw SearchFailure("minimize_scalar: objective non-finite at more than half of the probes",
                        static_cast<double>(probe.nonfinite) / probe.evaluations);
  return {probe.best_x, probe.best_v, probe.evaluations};
}

}  // namespace tailcert
