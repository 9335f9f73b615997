#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tailcert/certificate.hpp"
#include "tailcert/core_math.hpp"
#include "tailcert/models.hpp"

namespace tailcert {

struct QuantileCI {
  double point = 0;
  double lo = 0;
  double hi = 0;
};

/// Order-statistic quantile x_(⌈level·n⌉) (lower midpoint when level·n is
/// an integer) with an exact two-sided binomial interval at confidence conf.
QuantileCI empirical_quantile_ci(std::vector<double> values, double level, double conf);
/// Same on values already sorted ascending.
QuantileCI quantile_ci_sorted(const std::vector<double>& sorted, double level, double conf);

enum class Verdict { covered, violated, inconclusive };
std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct VerificationReport {
  BoundCertificate certificate;
  double empirical_quantile = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  std::int64_t n_samples = 0;
  Verdict verdict = Verdict::inconclusive;
  std::uint64_t seed = 0;
  int d = 0;
  int n = 0;
};

Verdict verdict_for(double bound, double ci_lo, double ci_hi);

/// ‖X‖ for n_mc draws of the sampler, drawn in fixed chunks on sub-seeds of
/// `seed`, returned sorted.
std::vector<double> sample_norms(const SamplerSpec& sampler, const NormSpec& norm, std::int64_t n_mc,
                                 std::uint64_t seed);

/// Compares the 1−e^{−t} empirical quantile of ‖X‖ with the bound.
VerificationReport certify(const BoundCertificate& cert, const SamplerSpec& sampler, const NormSpec& norm,
                           std::int64_t n_mc, double conf, std::uint64_t seed);

/// certify on precomputed draws of the statistic.
VerificationReport certify_values(const BoundCertificate& cert, std::vector<double> values, double conf,
                                  std::uint64_t seed);

struct NuReport {
  double nu = 1;         // 1 / (lower confidence value of the worst probability)
  double nu_point = 1;   // 1 / (empirical worst probability)
  double ci_lo = 1;      // 1 / (upper confidence value)
  bool infinite = false;
  Vector worst_x;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
};

/// sup over x ∈ ∂B of 1/P₀(|⟨U,x⟩| ≥ 1), U drawn by `draw_u`.
NuReport estimate_nu_adversarial(const VectorDraw& draw_u, int dim, const NormSpec& norm, int x_search_budget,
                                 int mc_budget, std::uint64_t seed, double conf = 0.99);
NuReport estimate_nu_adversarial(const SamplerSpec& u_sampler, const NormSpec& norm, int x_search_budget,
                                 int mc_budget, std::uint64_t seed, double conf = 0.99);

struct ProfileCheck {
  bool pass = true;
  double worst_ratio = 0;  // max over (u, p) of empirical moment / declared bound
  double worst_p = 0;
  Vector worst_u;
  int failures = 0;
};

/// Empirical check of (E|⟨u,X⟩|^p)^{1/p} ≤ h(p)‖u‖_Σ on random directions
/// (uᵀZu and ‖u‖²_Σ for PSD families). A pair fails when the moment estimate
/// exceeds the bound by more than three standard errors.
ProfileCheck profile_check(const SamplerSpec& sampler, int grid_u, const std::vector<double>& grid_p,
                           std::int64_t n_mc, std::uint64_t seed);

/// C = (upper end of the quantile interval) / (bound at C = 1).
CalibrationConstant calibrate_constant(const std::function<BoundCertificate(const CalibrationConstant&)>& bound,
                                       const SamplerSpec& sampler, const NormSpec& norm, std::int64_t n_mc,
                                       double conf, std::uint64_t seed, const std::string& family);

}  // namespace tailcert
