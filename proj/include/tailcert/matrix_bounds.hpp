#pragma once

#include <cstdint>
#include <vector>

#include "tailcert/certificate.hpp"
#include "tailcert/core_math.hpp"
#include "tailcert/models.hpp"

namespace tailcert {

/// C_{n,p} = sup_{q∈[max(2,p/n), p]} p·q·(n/p)^{1/q}, from the two endpoints.
double latala_Cnp(int n, double p);
/// Same supremum over an equispaced grid of `points` values of q.
double latala_Cnp_grid(int n, double p, int points = 10000);

/// C·η‖Σ‖_op √((2r+t)/n) · max{1, √((r+t/2)/n)}, r = r_eff(Σ).
BoundCertificate psd_sum_bound(double eta, const CovarianceSpec& cov, int n, double t,
                               const CalibrationConstant& cal);

/// C·η²‖Σ‖_op times the branch selected by r ≤ n^{1/3}; both branches are
/// reported in the diagnostics.
BoundCertificate sample_cov_bound(double eta, const CovarianceSpec& cov, int n, double t,
                                  const CalibrationConstant& cal);

struct SeriesStats {
  double sigma_star = 0;     // lower estimate (alternating maximization)
  double sigma = 0;
  double upsilon = 0;
  double sigma_diamond = 0;
  int n = 0, d1 = 0, d2 = 0;
  int restarts = 0;
};

struct SeriesBudgets {
  int restarts = 64;
  int sweeps = 200;
  double stagnation = 1e-10;
};

SeriesStats series_stats(const std::vector<Matrix>& A_list, const SeriesBudgets& budgets = {},
                         std::uint64_t seed = 0x5e71e5ULL);

/// C·inf_{p≥2} e^{t/p} h(p)(σ*√p + σ + υ + σ⋄/√p) for a Gaussian-relative
/// profile h. For constant h the value at p = 2t + 2σ⋄/σ* and the shape
/// σ + υ + √(σ⋄σ*) + √(2t)σ* are added to the diagnostics.
BoundCertificate series_bound(const SeriesStats& stats, const MomentProfile& profile, double t,
                              const CalibrationConstant& cal);

}  // namespace tailcert
