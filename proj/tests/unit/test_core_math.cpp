#include <doctest.h>

#include <cmath>
#include <vector>

#include "../oracles.hpp"
#include "tailcert/core_math.hpp"
#include "tailcert/errors.hpp"
#include "tailcert/rng.hpp"
#include "tailcert/stats.hpp"

using namespace tailcert;

TEST_CASE("gamma_factorial small values") {
  CHECK(gamma_factorial(1).value == doctest::Approx(1.0));
  CHECK(gamma_factorial(4).value == doctest::Approx(24.0));
  CHECK(gamma_factorial(0).value == doctest::Approx(1.0));
  // Γ(3/2) by the Euler product oracle is √π/2.
  CHECK(gamma_factorial(0.5).value == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-14));
  CHECK_FALSE(gamma_factorial(10).overflow);
}

TEST_CASE("gamma_factorial overflows gracefully") {
  const FactorialValue f = gamma_factorial(500);
  CHECK(f.overflow);
  CHECK(std::isinf(f.value));
  CHECK(f.log_value == doctest::Approx(std::lgamma(501.0)).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_factorial(-1), DomainError);
}

TEST_CASE("gaussian_abs_moment matches quadrature") {
  CHECK(gaussian_abs_moment(2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gaussian_abs_moment(4) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(gaussian_abs_moment(1) == doctest::Approx(std::sqrt(2 / M_PI)).epsilon(1e-14));
  for (double p : {2.5, 3.0, 5.0, 7.25})
    CHECK(gaussian_abs_moment(p) == doctest::Approx(oracle::gaussian_abs_moment(p)).epsilon(1e-9));
  const double want = 200 * std::log(2.0) + std::lgamma(200.5) - 0.5 * std::log(M_PI);
  CHECK(log_gaussian_abs_moment(400) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("gaussian_cdf_lower examples") {
  CHECK(gaussian_cdf_lower(0) == doctest::Approx(0.25));
  CHECK(gaussian_cdf_lower(1) == doctest::Approx(0.25 * std::exp(-2.0 / 3)).epsilon(1e-14));
  CHECK(gaussian_cdf_lower(1) <= oracle::upper_tail(1));
  CHECK(gaussian_cdf_lower(3) == doctest::Approx(6.197e-4).epsilon(1e-3));
  CHECK(gaussian_cdf_lower(3) <= oracle::upper_tail(3));
}

TEST_CASE("gaussian_cdf_lower is below the upper tail on a fine grid") {
  for (int i = 0; i <= 10000; ++i) {
    const double z = i * 1e-3;
    REQUIRE(gaussian_cdf_lower(z) <= oracle::upper_tail(z));
  }
}

TEST_CASE("gaussian_cdf agrees with erfc") {
  for (double z : {-4.0, -1.0, 0.0, 0.3, 2.5})
    CHECK(gaussian_cdf(z) == doctest::Approx(1 - oracle::upper_tail(z)).epsilon(1e-14));
  CHECK(gaussian_pdf(0) == doctest::Approx(1 / std::sqrt(2 * M_PI)));
}

TEST_CASE("quadratic form moment bound examples") {
  Matrix I2 = Matrix::Identity(2, 2);
  CHECK(quadratic_form_moment_bound(I2, 1, QuadFormMode::simplified) == doctest::Approx(3.0));
  Matrix B(2, 2);
  B << 1, 0, 0, -1;
  CHECK(quadratic_form_moment_bound(B, 2, QuadFormMode::simplified) == doctest::Approx(16.0));
  Matrix E = Matrix::Zero(2, 2);
  E(0, 0) = 1;
  CHECK(quadratic_form_moment_bound(E, 2, QuadFormMode::product) == doctest::Approx(3.0));
}

TEST_CASE("quadratic form: product never exceeds simplified") {
  CounterRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int l = 1 + static_cast<int>(rng.uniform() * 6);
    Matrix W(l, l);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) W(i, j) = rng.normal();
    const Matrix B = 0.5 * (W + W.transpose());
    for (double p : {1.0, 1.5, 2.0, 3.0, 4.0})
      REQUIRE(quadratic_form_moment_bound(B, p, QuadFormMode::product) <=
              quadratic_form_moment_bound(B, p, QuadFormMode::simplified) * (1 + 1e-12));
  }
}

TEST_CASE("quadratic form: rejects asymmetric input and symmetrizes round-off") {
  Matrix B(2, 2);
  B << 1, 0.5, 0.0, 1;
  CHECK_THROWS_AS(quadratic_form_moment_bound(B, 2, QuadFormMode::product), DomainError);
  Matrix C(2, 2);
  C << 1, 0.5, 0.5 + 1e-14, 1;
  CHECK_NOTHROW(quadratic_form_moment_bound(C, 2, QuadFormMode::product));
}

TEST_CASE("second moment lower bounds") {
  CHECK(second_moment_lower(1, 1) == doctest::Approx(1.0));
  CHECK(second_moment_lower(0.25, 0.125) == doctest::Approx(0.5));
  const double pz = second_moment_lower_rho(1, 1, 0.5);
  CHECK(pz == doctest::Approx(0.2));
  CHECK(pz <= std::exp(-0.5));
  // Cauchy-Schwarz forbids mean_plus² > sq_plus.
  CHECK_THROWS_AS(second_moment_lower(2, 1), InconsistencyError);
}

TEST_CASE("spectral_stats") {
  const SpectralStats id = spectral_stats(Matrix::Identity(5, 5));
  CHECK(id.operator_norm == doctest::Approx(1));
  CHECK(id.trace == doctest::Approx(5));
  CHECK(id.effective_rank == doctest::Approx(5));
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 4, 1, 1;
  const SpectralStats d = spectral_stats(D);
  CHECK(d.operator_norm == doctest::Approx(4));
  CHECK(d.trace == doctest::Approx(6));
  CHECK(d.effective_rank == doctest::Approx(1.5));

  CounterRng rng(5);
  Matrix W(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) W(i, j) = rng.normal();
  const Matrix P = W * W.transpose();
  const SpectralStats s = spectral_stats(P);
  const Eigen::JacobiSVD<Matrix> svd(P);
  CHECK(s.nuclear_norm == doctest::Approx(svd.singularValues().sum()).epsilon(1e-12));
  CHECK(s.nuclear_norm == doctest::Approx(s.trace).epsilon(1e-12));
  CHECK(s.frobenius_norm == doctest::Approx(P.norm()).epsilon(1e-12));

  const SpectralStats rect = spectral_stats(Matrix::Ones(2, 3));
  CHECK(std::isnan(rect.trace));
  CHECK(rect.operator_norm == doctest::Approx(std::sqrt(6.0)));
}

TEST_CASE("minimize_scalar examples") {
  ScalarSearchDomain dom;
  dom.lo = 1;
  dom.hi = 10;
  const ScalarMinimum m = minimize_scalar([](double p) { return (p - 3) * (p - 3); }, dom);
  CHECK(m.argmin == doctest::Approx(3).epsilon(1e-3));

  ScalarSearchDomain wide;
  wide.lo = 0.1;
  wide.hi = 1e3;
  wide.tolerance = 1e-7;
  const ScalarMinimum e = minimize_scalar([](double p) { return std::exp(2 / p) * std::sqrt(p); }, wide);
  CHECK(e.argmin == doctest::Approx(4).epsilon(1e-3));

  const ScalarMinimum c = minimize_scalar([](double) { return 1.0; }, dom);
  CHECK(c.argmin == 1.0);
}

TEST_CASE("minimize_scalar treats non-finite values as +inf") {
  ScalarSearchDomain dom;
  dom.lo = 1;
  dom.hi = 100;
  const ScalarMinimum m =
      minimize_scalar([](double p) { return p < 5 ? std::nan("") : (p - 20) * (p - 20); }, dom);
  CHECK(m.argmin == doctest::Approx(20).epsilon(1e-3));
  CHECK_THROWS_AS(minimize_scalar([](double) { return std::nan(""); }, dom), SearchFailure);
  ScalarSearchDomain bad;
  bad.lo = 0;
  CHECK_THROWS_AS(minimize_scalar([](double p) { return p; }, bad), DomainError);
}

TEST_CASE("log_sum_exp") {
  const std::vector<double> v{1000, 1000};
  CHECK(log_sum_exp(v) == doctest::Approx(1000 + std::log(2.0)));
  const std::vector<double> empty;
  CHECK(std::isinf(log_sum_exp(empty)));
}

TEST_CASE("binomial cdf and Clopper-Pearson") {
  CHECK(binomial_cdf(-1, 10, 0.3) == 0.0);
  CHECK(binomial_cdf(10, 10, 0.3) == 1.0);
  CHECK(binomial_cdf(0, 3, 0.5) == doctest::Approx(0.125));
  CHECK(binomial_cdf(1, 3, 0.5) == doctest::Approx(0.5));
  // x = 0: lower is 0 and upper solves (1-p)^n = alpha.
  CHECK(clopper_pearson_lower(0, 100, 0.05) == 0.0);
  CHECK(clopper_pearson_upper(0, 100, 0.05) == doctest::Approx(1 - std::pow(0.05, 0.01)).epsilon(1e-9));
  CHECK(clopper_pearson_upper(100, 100, 0.05) == 1.0);
  for (std::int64_t x : {1, 5, 50, 99}) {
    const double lo = clopper_pearson_lower(x, 100, 0.01);
    const double hi = clopper_pearson_upper(x, 100, 0.01);
    CHECK(lo < x / 100.0);
    CHECK(hi > x / 100.0);
    CHECK(1 - binomial_cdf(x - 1, 100, lo) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(binomial_cdf(x, 100, hi) == doctest::Approx(0.01).epsilon(1e-6));
  }
}

TEST_CASE("compensated sum recovers small addends") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
}

TEST_CASE("counter rng is deterministic and roughly normal") {
  CounterRng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CounterRng r(7);
  double s = 0, s2 = 0, l4 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = r.normal();
    s += g;
    s2 += g * g;
    const double l = r.laplace();
    l4 += l * l * l * l;
  }
  CHECK(std::fabs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1).epsilon(0.01));
  CHECK(l4 / n == doctest::Approx(6).epsilon(0.05));
}
