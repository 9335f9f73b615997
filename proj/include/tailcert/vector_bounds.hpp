#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tailcert/certificate.hpp"
#include "tailcert/core_math.hpp"
#include "tailcert/models.hpp"

namespace tailcert {

/// p ↦ log E₀(M_X(U, p)).
using LogMomentFn = std::function<double(double)>;

/// inf_p e^{t/p} (E₀ M_X(U,p))^{1/p} ν^{1/p} over the given p-domain.
BoundCertificate lemma1_bound(const LogMomentFn& log_moment, double nu, double t,
                              const ScalarSearchDomain& domain);

/// inf_{p≥2} 2p^{-1/2} h(p) (tr Σ + (p/2)‖Σ‖_op)^{1/2} e^{(t+log 2)/p}.
BoundCertificate theorem2_bound(const MomentProfile& profile, const CovarianceSpec& cov, double t);

enum class EuclideanClosedForm { sub_gaussian, sub_exponential };

/// 6η(tr Σ + t‖Σ‖_op)^{1/2}, or 4√e·η(√(t tr Σ) + t‖Σ‖_op^{1/2}) for t ≥ 1.
BoundCertificate closed_form_euclidean(EuclideanClosedForm kind, double eta,
                                       const CovarianceSpec& cov, double t);

/// Per-vertex probabilities P(U = ρ₀u_i) of the argmax pushforward of a
/// standard Gaussian onto ρ₀·ext(B_*). `lower` are one-sided
/// Clopper-Pearson bounds (Bonferroni over vertices).
struct VertexMasses {
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<std::int64_t> counts;  // draws landing on ±u_i
  std::int64_t n = 0;
  bool exact = false;
};

VertexMasses vertex_masses(const NormSpec& norm, int mc_budget, std::uint64_t seed,
                           double alpha = 1e-3);

struct PolyhedralConstants {
  int k = 1;
  double c_k = 1.0;
  double pi_k = 0.0;
  int search_budget = 0;
  bool c_exact = false;
  bool pi_exact = false;
  bool pi_floor = false;  // some vertex in the k smallest had zero hits
  Vector minimizer;       // point of ∂B attaining the reported c_k
};

/// c_k = 1 / min_{x∈∂B} (k-th largest |⟨u_i,x⟩|), by random restarts plus
/// pattern-search polish (exact for the canonical ℓ∞ set).
double polyhedral_ck(const NormSpec& norm, int k, int search_budget, std::uint64_t seed,
                     Vector* minimizer = nullptr, bool* exact = nullptr);

PolyhedralConstants polyhedral_constants(const NormSpec& norm, int k, int mc_budget,
                                         int search_budget, std::uint64_t seed);

struct PolyhedralOptions {
  int mc_budget = 200000;
  int search_budget = 64;
  std::uint64_t seed = 0x9017ULL;
};

/// min over k of the simplified polyhedral bound and the weighted-vertex
/// form; both are evaluated and the smaller is reported.
BoundCertificate polyhedral_bound(const NormSpec& norm, double t, const std::vector<int>& k_range,
                                  const PolyhedralOptions& opt = {});

/// √(2e(log(2d)+t)) for ‖G‖_∞, G ∼ N(0, I_d).
BoundCertificate linf_gaussian_bound(int d, double t);

}  // namespace tailcert
