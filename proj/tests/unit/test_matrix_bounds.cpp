#include <doctest.h>

#include <cmath>
#include <vector>

#include "../oracles.hpp"
#include "tailcert/errors.hpp"
#include "tailcert/matrix_bounds.hpp"

using namespace tailcert;

namespace {

std::vector<Matrix> diagonal_units(int d) {
  std::vector<Matrix> A;
  for (int i = 0; i < d; ++i) {
    Matrix E = Matrix::Zero(d, d);
    E(i, i) = 1;
    A.push_back(E);
  }
  return A;
}

std::vector<Matrix> random_list(int n, int d1, int d2, CounterRng& rng) {
  std::vector<Matrix> A(n, Matrix(d1, d2));
  for (auto& M : A)
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d2; ++j) M(i, j) = rng.normal();
  return A;
}

const CalibrationConstant kUnit{1.0, "unit", 0};

}  // namespace

TEST_CASE("latala constant examples") {
  CHECK(latala_Cnp(16, 2) == doctest::Approx(4 * std::sqrt(8.0)).epsilon(1e-14));
  CHECK(latala_Cnp(1, 4) == doctest::Approx(16 * std::pow(0.25, 0.25)).epsilon(1e-14));
  CHECK(latala_Cnp(1, 4) == doctest::Approx(11.3137).epsilon(1e-5));
}

TEST_CASE("latala endpoint maximum equals the grid supremum") {
  CounterRng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 500);
    const double p = 2 + rng.uniform() * 200;
    REQUIRE(latala_Cnp(n, p) == doctest::Approx(oracle::cnp_grid(n, p, 10000)).epsilon(1e-9));
  }
  CHECK(latala_Cnp_grid(40, 30) == doctest::Approx(latala_Cnp(40, 30)).epsilon(1e-9));
}

TEST_CASE("psd sum bound") {
  Matrix rank_one = Matrix::Zero(3, 3);
  rank_one(0, 0) = 2;
  const CovarianceSpec r1(rank_one);
  const double b1 = psd_sum_bound(2, r1, 1000, 0, kUnit).bound_value;
  const double b4 = psd_sum_bound(2, r1, 4000, 0, kUnit).bound_value;
  CHECK(b4 / b1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b1 == doctest::Approx(2 * 2 * std::sqrt(2.0 / 1000)).epsilon(1e-12));

  const BoundCertificate c = psd_sum_bound(1, CovarianceSpec::identity(5), 10, 1, CalibrationConstant{3, "fam", 7});
  CHECK(c.diagnostics.at("r_eff") == doctest::Approx(5));
  CHECK(c.constant_mode == ConstantMode::calibrated);
  REQUIRE(c.calibration.has_value());
  CHECK(c.calibration->family == "fam");
  CHECK(c.calibration->seed == 7);
  const double want = 3 * std::sqrt(11.0 / 10) * std::max(1.0, std::sqrt(5.5 / 10));
  CHECK(c.bound_value == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("sample covariance bound branches") {
  const CovarianceSpec I8 = CovarianceSpec::identity(8);
  const BoundCertificate c = sample_cov_bound(1, I8, 4096, 1, kUnit);
  const double a = 8 + 1 + std::log(8.0);
  CHECK(c.diagnostics.at("branch") == 1);
  CHECK(c.bound_value == doctest::Approx(std::max(a * a / 4096, std::sqrt(a / 4096))).epsilon(1e-14));

  // r = n^{1/3} exactly: both branches reported.
  const BoundCertificate edge = sample_cov_bound(2, I8, 512, 0, kUnit);
  CHECK(edge.diagnostics.count("branch1_value") == 1);
  CHECK(edge.diagnostics.count("branch2_value") == 1);
  CHECK(edge.diagnostics.at("branch_gap") ==
        doctest::Approx(edge.diagnostics.at("branch2_value") - edge.diagnostics.at("branch1_value")));

  const BoundCertificate big = sample_cov_bound(1, CovarianceSpec::identity(40), 1000, 1, kUnit);
  CHECK(big.diagnostics.at("branch") == 2);
  const double m = 10 + 1 + std::log(8.0);
  CHECK(big.bound_value == doctest::Approx(std::max(m * m / 1000, 40 * m / 1000)).epsilon(1e-12));
}

TEST_CASE("matrix bounds scale and are monotone in t") {
  const CovarianceSpec cov = CovarianceSpec::diagonal((Vector(4) << 3, 2, 1, 0.5).finished());
  double prev_psd = 0, prev_cov = 0;
  for (double t : {0.0, 0.5, 1.0, 3.0, 10.0}) {
    const double a = psd_sum_bound(2, cov, 64, t, kUnit).bound_value;
    const double b = sample_cov_bound(2, cov, 64, t, kUnit).bound_value;
    CHECK(a >= prev_psd);
    CHECK(b >= prev_cov);
    prev_psd = a;
    prev_cov = b;
    CHECK(psd_sum_bound(2, cov.scaled(4), 64, t, kUnit).bound_value == doctest::Approx(4 * a).epsilon(1e-12));
    CHECK(sample_cov_bound(2, cov.scaled(4), 64, t, kUnit).bound_value == doctest::Approx(4 * b).epsilon(1e-12));
  }
}

TEST_CASE("series stats on diagonal units") {
  const SeriesStats s = series_stats(diagonal_units(6));
  CHECK(s.sigma_star == doctest::Approx(1).epsilon(1e-9));
  CHECK(s.upsilon == doctest::Approx(1).epsilon(1e-12));
  CHECK(s.sigma == doctest::Approx(2).epsilon(1e-12));
  CHECK(s.sigma_diamond == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("series stats for a single matrix") {
  CounterRng rng(4);
  const auto A = random_list(1, 3, 5, rng);
  const SeriesStats s = series_stats(A);
  const Eigen::JacobiSVD<Matrix> svd(A[0]);
  CHECK(s.sigma_star == doctest::Approx(svd.singularValues()(0)).epsilon(1e-9));
  CHECK(s.upsilon == doctest::Approx(A[0].norm()).epsilon(1e-12));
  CHECK(s.sigma_diamond == doctest::Approx(A[0].norm()).epsilon(1e-12));
}

TEST_CASE("series stats ordering and random-w oracle") {
  CounterRng rng(5);
  const auto A = random_list(2, 3, 3, rng);
  const SeriesStats s = series_stats(A);
  CHECK(s.sigma_star <= s.upsilon * (1 + 1e-12));
  CHECK(s.upsilon <= s.sigma_diamond * (1 + 1e-12));
  double best = 0;
  CounterRng wr(6);
  for (int i = 0; i < 100000; ++i) {
    const double a = wr.normal(), b = wr.normal();
    const double r = std::hypot(a, b);
    const Matrix M = (a / r) * A[0] + (b / r) * A[1];
    best = std::max(best, Eigen::JacobiSVD<Matrix>(M).singularValues()(0));
  }
  CHECK(s.sigma_star == doctest::Approx(best).epsilon(0.01));
  CHECK(s.sigma_star >= best * (1 - 1e-9));

  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 5, d1 = 1 + trial % 3, d2 = 2 + trial % 4;
    const SeriesStats r = series_stats(random_list(n, d1, d2, rng), SeriesBudgets{8, 200, 1e-10}, trial);
    REQUIRE(r.sigma_star <= r.upsilon * (1 + 1e-12));
    REQUIRE(r.upsilon <= r.sigma_diamond * (1 + 1e-12));
  }
  std::vector<Matrix> bad{Matrix::Identity(2, 2), Matrix::Identity(3, 3)};
  CHECK_THROWS_AS(series_stats(bad), DomainError);
}

TEST_CASE("series stats and bound scale homogeneously") {
  CounterRng rng(8);
  auto A = random_list(3, 2, 3, rng);
  const SeriesStats s = series_stats(A);
  for (auto& M : A) M *= 2.5;
  const SeriesStats s2 = series_stats(A);
  CHECK(s2.sigma_star == doctest::Approx(2.5 * s.sigma_star).epsilon(1e-9));
  CHECK(s2.sigma == doctest::Approx(2.5 * s.sigma).epsilon(1e-12));
  CHECK(s2.upsilon == doctest::Approx(2.5 * s.upsilon).epsilon(1e-12));
  CHECK(s2.sigma_diamond == doctest::Approx(2.5 * s.sigma_diamond).epsilon(1e-12));
  MomentProfile one = MomentProfile::constant(1);
  one.gaussian_relative = true;
  CHECK(series_bound(s2, one, 1, kUnit).bound_value ==
        doctest::Approx(2.5 * series_bound(s, one, 1, kUnit).bound_value).epsilon(1e-9));
}

TEST_CASE("series bound closed path and zero series") {
  MomentProfile one = MomentProfile::constant(1);
  one.gaussian_relative = true;
  const int d = 16;
  const BoundCertificate c = series_bound(series_stats(diagonal_units(d)), one, 0, kUnit);
  CHECK(c.diagnostics.at("closed_path_shape") == doctest::Approx(3 + std::pow(d, 0.25)).epsilon(1e-8));
  CHECK(c.bound_value == doctest::Approx(c.diagnostics.at("closed_path_value")).epsilon(0.1));
  CHECK(c.bound_value <= c.diagnostics.at("closed_path_value") * (1 + 1e-12));

  SeriesStats zero;
  CHECK(series_bound(zero, one, 1, kUnit).bound_value == 0);
  CHECK_THROWS_AS(series_bound(zero, MomentProfile::constant(1), 1, kUnit), DomainError);
}

TEST_CASE("series bound with a sub-exponential relative profile matches a grid") {
  SeriesStats s;
  s.sigma_star = 1.3;
  s.sigma = 2.1;
  s.upsilon = 1.7;
  s.sigma_diamond = 4.2;
  MomentProfile h = MomentProfile::power(M_SQRT1_2, 1);
  h.gaussian_relative = true;
  h.domain_lo = 2;
  const double t = 1.5;
  const double got = series_bound(s, h, t, kUnit).bound_value;
  double best = INFINITY;
  for (int i = 0; i < 100000; ++i) {
    const double p = 2 * std::pow(5e3, i / 99999.0);
    best = std::min(best, std::exp(t / p) * p * M_SQRT1_2 *
                              (s.sigma_star * std::sqrt(p) + s.sigma + s.upsilon + s.sigma_diamond / std::sqrt(p)));
  }
  CHECK(got == doctest::Approx(best).epsilon(1e-6));
}
