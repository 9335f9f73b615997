#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

namespace tailcert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline std::span<const double> as_span(const Vector& v) noexcept {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

struct FactorialValue {
  double value;      // Γ(p+1), or +inf when overflow is set
  double log_value;  // log Γ(p+1), always finite
  bool overflow;
};

/// Γ(p+1) for real p ≥ 0.
FactorialValue gamma_factorial(double p);

double log_factorial(double p);

/// E|g|^p = 2^{p/2} Γ((p+1)/2) / √π for standard Gaussian g.
double gaussian_abs_moment(double p);
double log_gaussian_abs_moment(double p);

double gaussian_pdf(double z);
double gaussian_cdf(double z);

/// e^{-2z²/3}/4, a lower bound on Φ(-z) for z ≥ 0.
double gaussian_cdf_lower(double z);

enum class QuadFormMode { product, simplified };

/// Upper bound on E|GᵀBG|^p for symmetric B and standard Gaussian G.
double quadratic_form_moment_bound(const Matrix& B, double p, QuadFormMode mode);
double log_quadratic_form_moment_bound(const Matrix& B, double p, QuadFormMode mode);

/// Second-moment lower bound (E(ξ-s)₊)² / E(ξ-s)₊² on P(ξ ≥ s).
double second_moment_lower(double mean_plus, double sq_plus);

/// Paley-Zygmund form (1-ρ)²m² / (var + (1-ρ)²m²) bounding P(ξ > ρm) for
/// nonnegative ξ with mean m and variance var.
double second_moment_lower_rho(double mean, double variance, double rho);

struct SpectralStats {
  double operator_norm = 0;
  double nuclear_norm = 0;
  double frobenius_norm = 0;
  double trace = 0;           // NaN for non-square input
  double effective_rank = 0;  // trace / operator_norm, NaN if undefined
};

SpectralStats spectral_stats(const Matrix& M);

bool is_symmetric(const Matrix& M, double rel_tol = 1e-10);

struct ScalarSearchDomain {
  double lo = 1.0;
  double hi = 1e4;
  bool log_scale = true;
  double tolerance = 1e-4;
  int coarse_points = 25;
};

struct ScalarMinimum {
  double argmin;
  double value;
  int evaluations;
};

/// Deterministic bracketed minimization: coarse scan, golden-section
/// refinement around the best scan point, then a 17-point local grid.
/// Non-finite objective values are treated as +inf.
ScalarMinimum minimize_scalar(const std::function<double(double)>& f,
                              const ScalarSearchDomain& domain);

double log_sum_exp(std::span<const double> v);

}  // namespace tailcert
