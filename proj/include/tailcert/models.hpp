#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailcert/core_math.hpp"
#include "tailcert/rng.hpp"

namespace tailcert {

enum class NormKind { euclidean, sup, polyhedral, matrix_operator, symmetric_operator };

std::string to_string(NormKind k);

/// A norm on ℝ^d, or on d1×d2 matrices flattened row-major.
///
/// Polyhedral norms are described by the extreme points ±u_i of the dual
/// ball (rows of `vertices`), so that ‖x‖ = max_i |⟨u_i, x⟩|. The primal ball
/// is only vertex-enumerated to compute its ℓ₂ radius.
class NormSpec {
 public:
  static NormSpec euclidean(int d);
  static NormSpec sup(int d);
  static NormSpec polyhedral(Matrix vertices);
  static NormSpec matrix_operator(int d1, int d2);
  static NormSpec symmetric_operator(int l);

  NormKind kind() const noexcept { return kind_; }
  /// Length of the (flattened) argument.
  int dim() const noexcept { return dim_; }
  int rows() const noexcept { return d1_; }
  int cols() const noexcept { return d2_; }
  bool is_matrix() const noexcept {
    return kind_ == NormKind::matrix_operator || kind_ == NormKind::symmetric_operator;
  }

  double norm(std::span<const double> x) const;
  double dual_norm(std::span<const double> x) const;
  double eval(std::span<const double> x, bool dual) const { return dual ? dual_norm(x) : norm(x); }

  /// Extreme point of B_* maximizing ⟨u, x⟩ (vector kinds only). For
  /// polyhedral norms ties go to the lowest vertex index, + before -.
  Vector dual_argmax(std::span<const double> x) const;

  /// Signed vertex index of dual_argmax for sup and polyhedral kinds:
  /// 2i for +u_i, 2i+1 for -u_i.
  int dual_argmax_index(std::span<const double> x) const;

  /// rad(B) = sup_{x ∈ B} ‖x‖₂.
  double radius_l2() const noexcept { return radius_; }
  /// False when the polyhedral radius came from the sampling fallback.
  bool radius_exact() const noexcept { return radius_exact_; }
  /// max_i ‖u_i‖₂ over dual extreme points (1 for euclidean and sup).
  double max_vertex_l2() const;
  /// Largest r with r·B₂ ⊂ B.
  double inradius() const;
  bool is_canonical_linf() const noexcept { return canonical_linf_; }

  /// Dual extreme points as rows (sup: identity, polyhedral: the u_i).
  const Matrix& vertices() const;
  int vertex_count() const noexcept { return static_cast<int>(vertices_.rows()); }

  std::string describe() const;

 private:
  NormSpec() = default;
  void compute_radius();

  NormKind kind_ = NormKind::euclidean;
  int dim_ = 0;
  int d1_ = 0;
  int d2_ = 0;
  Matrix vertices_;
  double radius_ = 1.0;
  bool radius_exact_ = true;
  bool canonical_linf_ = false;
};

enum class ProfileKind { sub_gaussian, sub_exponential, sub_gamma, power, table };

std::string to_string(ProfileKind k);

/// Moment profile h(p) with (E|⟨u,X⟩|^p)^{1/p} ≤ h(p)‖u‖_Σ. When
/// gaussian_relative is set, h is relative to (E|g|^p)^{1/p} instead.
struct MomentProfile {
  ProfileKind kind = ProfileKind::sub_gaussian;
  double eta = 1.0;    // η, or η₁ for sub_gamma
  double eta2 = 0.0;   // η₂ for sub_gamma
  double alpha = 1.0;  // exponent for power
  std::vector<double> p_grid;
  std::vector<double> h_values;
  bool gaussian_relative = false;
  double domain_lo = 1.0;

  static MomentProfile sub_gaussian(double eta);
  static MomentProfile sub_exponential(double eta);
  static MomentProfile sub_gamma(double eta1, double eta2);
  static MomentProfile power(double eta, double alpha);
  static MomentProfile table(std::vector<double> p_grid, std::vector<double> h_values);
  static MomentProfile constant(double c);  // h ≡ c (power with α = 0)

  double h(double p) const;
  double log_h(double p) const;
  /// Upper end of the domain on which h is finite.
  double domain_hi() const;
  /// Throws ConfigError unless h is finite, nonnegative and non-decreasing
  /// on a 64-point grid of its domain.
  void validate() const;
  std::string describe() const;
};

/// PSD covariance with cached spectral data.
class CovarianceSpec {
 public:
  explicit CovarianceSpec(const Matrix& sigma);
  static CovarianceSpec identity(int d);
  static CovarianceSpec diagonal(const Vector& diag);

  int dim() const noexcept { return static_cast<int>(sigma_.rows()); }
  const Matrix& sigma() const noexcept { return sigma_; }
  const Matrix& sqrt() const noexcept { return sqrt_; }
  bool invertible() const noexcept { return invertible_; }
  /// Σ^{-1/2}; throws ConfigError when Σ is singular.
  const Matrix& inv_sqrt() const;
  const Vector& eigenvalues() const noexcept { return evals_; }
  const Matrix& eigenvectors() const noexcept { return evecs_; }
  const SpectralStats& stats() const noexcept { return stats_; }

  double trace() const noexcept { return stats_.trace; }
  double op() const noexcept { return stats_.operator_norm; }
  double r_eff() const noexcept { return stats_.effective_rank; }
  double trace_sqrt() const noexcept { return trace_sqrt_; }
  /// ‖Σ^{-1}‖_op; throws ConfigError when singular.
  double inv_op() const;

  /// ‖u‖_Σ = (uᵀΣu)^{1/2}.
  double norm_sigma(std::span<const double> u) const;
  /// ‖Σ‖_□ = sup_{u ∈ B_*} uᵀΣu for the given (vector) norm.
  double box_norm(const NormSpec& norm) const;

  bool is_diagonal() const noexcept { return diagonal_; }
  bool is_scaled_identity() const noexcept { return scaled_identity_; }

  CovarianceSpec scaled(double s2) const { return CovarianceSpec(s2 * sigma_); }

 private:
  Matrix sigma_;
  Matrix sqrt_;
  Matrix inv_sqrt_;
  Vector evals_;
  Matrix evecs_;
  SpectralStats stats_;
  double trace_sqrt_ = 0;
  bool invertible_ = false;
  bool diagonal_ = false;
  bool scaled_identity_ = false;
};

enum class SamplerFamily {
  gaussian_vector,
  product_subexp_vector,
  rademacher_vector,
  psd_rank_one,
  empirical_cov,
  matrix_series
};

enum class CoreDist { gaussian, laplace, rademacher };

std::string to_string(SamplerFamily f);
std::string to_string(CoreDist c);

/// Declarative description of a sampled family.
///
///  gaussian_vector        X = Σ^{1/2} g
///  product_subexp_vector  X = Σ^{1/2} ℓ, ℓ i.i.d. unit-variance Laplace (η = 2)
///  rademacher_vector      X = ε ∈ {±1}^d
///  psd_rank_one           Z = YYᵀ with Y = Σ^{1/2} · core
///  empirical_cov          D = n⁻¹ Σ_i Y_iY_iᵀ − Σ
///  matrix_series          X = Σ_i ξ_i A_i
///
/// Matrix outputs are flattened row-major.
struct SamplerSpec {
  SamplerFamily family = SamplerFamily::gaussian_vector;
  std::shared_ptr<const CovarianceSpec> cov;
  int n = 1;
  CoreDist core = CoreDist::gaussian;
  std::vector<Matrix> A_list;
  std::uint64_t seed = 0;
  MomentProfile declared_profile;

  static SamplerSpec gaussian(std::shared_ptr<const CovarianceSpec> cov, std::uint64_t seed);
  static SamplerSpec subexp(std::shared_ptr<const CovarianceSpec> cov, std::uint64_t seed);
  static SamplerSpec rademacher(int d, std::uint64_t seed);
  static SamplerSpec rank_one(std::shared_ptr<const CovarianceSpec> cov, CoreDist core,
                              std::uint64_t seed);
  static SamplerSpec empirical(std::shared_ptr<const CovarianceSpec> cov, int n, CoreDist core,
                               std::uint64_t seed);
  static SamplerSpec series(std::vector<Matrix> A_list, CoreDist coefficients, std::uint64_t seed);

  bool is_matrix() const noexcept;
  int out_rows() const;
  int out_cols() const;
  int out_dim() const { return out_rows() * out_cols(); }
  /// Covariance of vector families.
  const CovarianceSpec& covariance() const;
  void validate() const;
};

/// Stateful draw stream for a SamplerSpec. Same (spec, seed) ⇒ identical
/// stream, independent of how draws are batched.
class Sampler {
 public:
  Sampler(const SamplerSpec& spec, std::uint64_t seed);
  explicit Sampler(const SamplerSpec& spec) : Sampler(spec, spec.seed) {}

  void draw(std::span<double> out);
  /// n draws as rows of an n × out_dim matrix.
  Matrix batch(int n);
  int out_dim() const noexcept { return out_dim_; }
  CounterRng& rng() noexcept { return rng_; }

 private:
  double core_draw(CoreDist c);
  void linear_map(std::span<const double> z, std::span<double> out) const;

  SamplerSpec spec_;
  CounterRng rng_;
  int d_ = 0;
  int out_dim_ = 0;
  bool identity_map_ = false;
  bool diagonal_map_ = false;
  std::vector<double> sqrt_rows_;  // Σ^{1/2}, row-major
  std::vector<double> diag_sqrt_;
  std::vector<double> z_;
  Matrix Y_;
  Matrix S_;
};

/// Closed-form E|⟨u,X⟩|^p where available (Gaussian; one-dimensional
/// Laplace and Rademacher); std::nullopt otherwise.
std::optional<double> analytic_marginal_moment(const SamplerSpec& spec, std::span<const double> u,
                                               double p);

/// A draw procedure used by Monte Carlo estimators: fills `out` from `rng`.
using VectorDraw = std::function<void(CounterRng& rng, std::span<double> out)>;

}  // namespace tailcert
