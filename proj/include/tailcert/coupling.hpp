#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tailcert/certificate.hpp"
#include "tailcert/core_math.hpp"
#include "tailcert/models.hpp"
#include "tailcert/rng.hpp"

namespace tailcert {

/// A coupling (X, Y) given by the law of X and the conditional law of Y.
/// conditional_y must be a deterministic function of (x, rng state).
struct CouplingSpec {
  SamplerSpec x_sampler;
  std::function<double(std::span<const double> x, CounterRng& rng)> conditional_y;
  std::function<double(std::span<const double> x)> F;
  std::vector<Vector> probes;  // empty: probe points are drawn from x_sampler
  std::string name = "custom";
};

/// Y = F(X).
CouplingSpec identity_coupling(SamplerSpec x_sampler, std::function<double(std::span<const double>)> F);
/// X ∼ N(0, 1), F(x) = x, Y | X = x ∼ N(x, 1).
CouplingSpec shifted_gaussian_coupling(std::uint64_t seed);
/// X_i ∼ N(0, σ_i²) independent, F_θ(x) = |x_θ| − b, Y = |X_J| − b with J
/// uniform on [d].
CouplingSpec example2_coupling(const std::vector<double>& sigmas, double b, int theta,
                               std::uint64_t seed);

struct NuEstimate {
  double nu = 1.0;        // conservative: 1 / (lower confidence value) maximized over probes
  double nu_point = 1.0;  // 1 / (empirical frequency) maximized over probes
  int probes = 0;
  int zero_success_probes = 0;
  std::vector<std::string> flags;
};

/// ν_F = sup_x 1/P(Y ≥ F(x) | X = x) over probe points.
NuEstimate nu_F_estimate(const CouplingSpec& coupling, int n_x, int n_y_per_x, std::uint64_t seed,
                         double alpha = 1e-3);

/// (p, b) ↦ log E(Y − b)₊^p; −inf when Y ≤ b almost surely.
using YLogMomentFn = std::function<double(double p, double b)>;

/// Empirical log E(Y − b)₊^p from a fixed sample of Y.
YLogMomentFn empirical_y_log_moment(std::vector<double> y);

/// 33 points: 0 and 32 geometric points around the median of y.
std::vector<double> default_b_grid(const std::vector<double>& y);

/// min over b ∈ b_grid, inf over p of b + e^{t/p}(E(Y−b)₊^p)^{1/p} ν^{1/p}.
BoundCertificate coupling_tail_bound(const YLogMomentFn& y_log_moment, double nu, double t,
                                     const std::vector<double>& b_grid,
                                     const ScalarSearchDomain& p_domain);

/// min{1, ν·P(Y ≥ s)} for each s, with P(Y ≥ s) from a sample of Y.
std::vector<double> tail_conversion(double nu, const std::vector<double>& y,
                                    const std::vector<double>& s_grid);

struct Measure {
  enum class Kind { discrete, gaussian } kind = Kind::discrete;
  std::vector<double> atoms;
  std::vector<double> weights;
  double mean = 0.0;
  double variance = 1.0;

  static Measure discrete(std::vector<double> atoms, std::vector<double> weights);
  static Measure gaussian(double mean, double variance);
  void validate() const;
};

/// D_α(μ, μ_ref) for α > 1 (α = +inf gives the max-divergence for
/// discrete measures).
double renyi_divergence(const Measure& mu, const Measure& mu_ref, double alpha);

/// e^{D/p + α log 2 / ((α−1)p)}; α = +inf uses α/(α−1) = 1.
double renyi_sup_multiplier(double D_alpha, double alpha, double p);

enum class HeteroMode { optimized, closed_form };

/// b + c(p)(Σ_i σ_i^p e^{−b²/(2σ_i²)})^{1/p} with c(p) = max{√(2p), (2Γ(p/2+1))^{1/p}}.
double hetero_linf_objective(const std::vector<double>& sigmas, double b, double p);

/// Bounds on E‖X‖_∞ for independent X_i ∼ N(0, σ_i²), σ sorted decreasing.
BoundCertificate hetero_linf_bound(const std::vector<double>& sigmas, HeteroMode mode);

}  // namespace tailcert
