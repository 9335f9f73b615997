#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "tailcert/certificate.hpp"
#include "tailcert/core_math.hpp"
#include "tailcert/models.hpp"

namespace tailcert {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// κ₀ ∈ (0, ∞], ρ₀ ∈ [0, ∞]; +inf selects the corresponding limit regime.
struct PushforwardParams {
  double kappa0 = 1.0;
  double rho0 = kInfinity;
  double tau = 1.0;
  double p = 1.0;

  void validate() const;
};

struct ProjectionResult {
  Vector point;
  int iterations = 0;
  double residual = 0.0;
  bool boundary = false;
};

/// argmin_{u∈ρB_*} ½(a − u)ᵀ M (a − u) with M = Σ^{1/2}.
ProjectionResult project_dual_ball(const Vector& a, double rho, const CovarianceSpec& cov,
                                   const NormSpec& norm);

/// ∇f₀(x) = argmin_{u∈ρ₀B_*} ½‖κ₀Σ^{-1/2}x − u‖²_{Σ^{1/2}}, with the two
/// limits κ₀ = ∞ (ρ₀ · dual argmax of x) and ρ₀ = ∞ (κ₀Σ^{-1/2}x).
ProjectionResult moreau_grad(const Vector& x, const CovarianceSpec& cov,
                             const PushforwardParams& params, const NormSpec& norm);

/// Euclidean projection onto the ℓ₁ ball of radius r (sort based).
Vector project_l1_ball(const Vector& v, double r);

struct TailValue {
  double geq = 1.0;        // point estimate of P(‖G‖_* ≥ s)
  double geq_upper = 1.0;  // one-sided upper confidence value
  double lt_upper = 0.0;   // one-sided upper confidence value for P(‖G‖_* < s)
  double half_width = 0.0;
};

/// T_⩾ / T_< for ‖G‖_*, G ∼ N(0, I_d). Exact (chi distribution) for the
/// Euclidean norm; otherwise from a sorted Monte Carlo sample of ‖G‖_*.
class DualTail {
 public:
  DualTail(const NormSpec& norm, int mc_budget, std::uint64_t seed, double alpha = 1e-3);
  TailValue operator()(double s) const;
  bool exact() const noexcept { return exact_; }
  int samples() const noexcept { return static_cast<int>(sorted_.size()); }

 private:
  bool exact_ = false;
  int d_ = 0;
  double alpha_;
  std::vector<double> sorted_;
};

TailValue dual_tail_T(double s, const NormSpec& norm, int mc_budget, std::uint64_t seed);

/// Ω_Σ(p, κ₀, ρ₀) with the τ-infimum taken numerically. The optimal τ is
/// written to *tau_out when given.
double omega_eval(const PushforwardParams& params, const CovarianceSpec& cov, double eta1,
                  double eta2, const NormSpec& norm, const DualTail& tails,
                  double* tau_out = nullptr);

struct LambdaNu {
  double lambda_lower = 0.0;
  double nu_bar = kInfinity;
  bool lambda_exact = false;
  bool first_branch_only = false;
  Vector worst_x;  // ∂B point attaining the reported λ̲ (search paths)
};

struct PushforwardBudgets {
  int mc_budget = 2000;
  int x_search_budget = 16;
  int tail_budget = 20000;
  int vertex_budget = 200000;
};

/// λ̲_Σ(κ₀, ρ₀) and ν̄_Σ(κ₀, ρ₀). Closed forms for ρ₀ = ∞ and for κ₀ = ∞ on
/// polyhedral norms (one LP per facet), Monte Carlo with common random
/// numbers and a split-sample lower confidence value otherwise.
LambdaNu lambda_nu_eval(const PushforwardParams& params, const CovarianceSpec& cov,
                        const NormSpec& norm, const DualTail& tails,
                        const PushforwardBudgets& budgets, std::uint64_t seed);

/// E(s|g| − 1)₊ for standard Gaussian g.
double gaussian_excess_mean(double s);

struct Theorem3Options {
  PushforwardBudgets budgets;
  bool kappa_inf = true;
  bool rho_inf = true;
  bool interior = true;
  std::vector<double> kappa_grid;  // empty: logspace(0.1, 10, 9)
  std::uint64_t seed = 0x3073ULL;
};

BoundCertificate theorem3_bound(const CovarianceSpec& cov, const NormSpec& norm, double eta1,
                                double eta2, double t, const Theorem3Options& opt = {});

/// 4√e·η(3 tr Σ + (2/(3 log 2))‖Σ‖_op t)^{1/2}.
double gaussian_limit_closed_form(double eta, const CovarianceSpec& cov, double t);

}  // namespace tailcert
