#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "../oracles.hpp"
#include "tailcert/errors.hpp"
#include "tailcert/vector_bounds.hpp"
#include "tailcert/verify.hpp"

using namespace tailcert;

namespace {

std::shared_ptr<const CovarianceSpec> identity(int d) {
  return std::make_shared<const CovarianceSpec>(CovarianceSpec::identity(d));
}

}  // namespace

TEST_CASE("quantile of 1..100 at the median") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  std::reverse(v.begin(), v.end());
  const QuantileCI q = empirical_quantile_ci(v, 0.5, 0.95);
  CHECK(q.point == 50);
  CHECK(q.lo <= 50);
  CHECK(q.hi >= 50);
  CHECK_THROWS_AS(empirical_quantile_ci(std::vector<double>(99, 1.0), 0.5, 0.95), DomainError);
}

TEST_CASE("uniform and exponential quantiles") {
  CounterRng rng(1);
  std::vector<double> u(100000), e(100000);
  for (auto& x : u) x = rng.uniform();
  for (auto& x : e) x = -std::log(rng.uniform_open());
  const QuantileCI qu = empirical_quantile_ci(u, 0.9, 0.99);
  CHECK(qu.point == doctest::Approx(0.9).epsilon(0.005));
  CHECK(qu.lo <= 0.9);
  CHECK(qu.hi >= 0.9);
  const double level = 1 - std::exp(-1.0);
  const QuantileCI qe = empirical_quantile_ci(e, level, 0.99);
  CHECK(oracle::exp_quantile(level) == doctest::Approx(1.0));
  CHECK(qe.point == doctest::Approx(1.0).epsilon(0.02));
  CHECK(qe.lo <= 1.0);
  CHECK(qe.hi >= 1.0);
}

TEST_CASE("extreme levels give infinite interval ends") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 0.0);
  const QuantileCI q = empirical_quantile_ci(v, 0.999, 0.99);
  CHECK(std::isinf(q.hi));
}

TEST_CASE("verdicts") {
  CHECK(verdict_for(5, 1, 2) == Verdict::covered);
  CHECK(verdict_for(0.5, 1, 2) == Verdict::violated);
  CHECK(verdict_for(1.5, 1, 2) == Verdict::inconclusive);
  for (Verdict v : {Verdict::covered, Verdict::violated, Verdict::inconclusive})
    CHECK(verdict_from_string(to_string(v)) == v);
  CHECK_THROWS(verdict_from_string("maybe"));
}

TEST_CASE("certify the sup-norm gaussian bound") {
  const BoundCertificate cert = linf_gaussian_bound(1000, 2);
  CHECK(cert.bound_value == doctest::Approx(7.225).epsilon(1e-3));
  const auto s = SamplerSpec::gaussian(identity(1000), 0);
  const VerificationReport r = certify(cert, s, NormSpec::sup(1000), 100000, 0.99, 3);
  CHECK(r.verdict == Verdict::covered);
  const double q = oracle::max_abs_gaussian_quantile(1000, 1 - std::exp(-2.0));
  CHECK(r.ci_lo <= q);
  CHECK(q <= r.ci_hi);
  CHECK(r.d == 1000);
  CHECK(r.n_samples == 100000);

  BoundCertificate half = cert;
  half.bound_value /= 2;
  CHECK(certify(half, s, NormSpec::sup(1000), 20000, 0.99, 3).verdict == Verdict::violated);

  // A bound at the empirical quantile itself cannot be decided with 100 draws.
  BoundCertificate tight = cert;
  tight.bound_value = r.empirical_quantile;
  CHECK(certify(tight, s, NormSpec::sup(1000), 100, 0.99, 3).verdict == Verdict::inconclusive);
}

TEST_CASE("certify is deterministic in its inputs") {
  const BoundCertificate cert = linf_gaussian_bound(20, 1);
  const auto s = SamplerSpec::gaussian(identity(20), 0);
  const VerificationReport a = certify(cert, s, NormSpec::sup(20), 5000, 0.99, 42);
  const VerificationReport b = certify(cert, s, NormSpec::sup(20), 5000, 0.99, 42);
  CHECK(a.empirical_quantile == b.empirical_quantile);
  CHECK(a.ci_lo == b.ci_lo);
  CHECK(a.ci_hi == b.ci_hi);
  const VerificationReport c = certify(cert, s, NormSpec::sup(20), 5000, 0.99, 43);
  CHECK(c.empirical_quantile != a.empirical_quantile);
  CHECK_THROWS_AS(certify(cert, s, NormSpec::sup(21), 5000, 0.99, 42), ConfigError);
}

TEST_CASE("sample_norms is sorted and chunk independent") {
  const auto s = SamplerSpec::gaussian(identity(3), 0);
  const auto v = sample_norms(s, NormSpec::euclidean(3), 10000, 5);
  CHECK(v.size() == 10000);
  CHECK(std::is_sorted(v.begin(), v.end()));
  double m = 0;
  for (double x : v) m += x * x / v.size();
  CHECK(m == doctest::Approx(3).epsilon(0.05));
}

TEST_CASE("coverage over independent seeds") {
  const BoundCertificate cert = linf_gaussian_bound(100, 1);
  const auto s = SamplerSpec::gaussian(identity(100), 0);
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    covered += certify(cert, s, NormSpec::sup(100), 5000, 0.99, seed).verdict == Verdict::covered;
  CHECK(covered >= 19);
}

TEST_CASE("adversarial nu for a scaled gaussian direction") {
  for (double kappa : {0.7, 1.0, 1.5}) {
    const VectorDraw draw = [kappa](CounterRng& rng, std::span<double> out) {
      for (double& x : out) x = kappa * rng.normal();
    };
    const double truth = oracle::nu_gaussian_euclid(kappa);
    const NuReport r = estimate_nu_adversarial(draw, 3, NormSpec::euclidean(3), 1000, 200000, 7);
    CHECK(r.nu_point == doctest::Approx(truth).epsilon(0.05));
    CHECK(r.nu >= truth * 0.99);
    CHECK(r.ci_lo <= r.nu_point);
  }
  CHECK(oracle::nu_gaussian_euclid(1) == doctest::Approx(3.152).epsilon(1e-3));
}

TEST_CASE("adversarial nu never under-reports across seeds") {
  const VectorDraw draw = [](CounterRng& rng, std::span<double> out) {
    for (double& x : out) x = rng.normal();
  };
  const double truth = oracle::nu_gaussian_euclid(1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const NuReport r = estimate_nu_adversarial(draw, 2, NormSpec::euclidean(2), 1000, 20000, seed);
    REQUIRE(r.nu >= truth * (1 - 0.02));
  }
}

TEST_CASE("adversarial nu on the sup norm with the vertex pushforward") {
  const int d = 4;
  const NormSpec s = NormSpec::sup(d);
  // U = c₁·(argmax signed vertex of G), c₁ = 1; ν ≤ 1/π₁ = 2d.
  const VectorDraw draw = [&](CounterRng& rng, std::span<double> out) {
    Vector g(d);
    for (int i = 0; i < d; ++i) g(i) = rng.normal();
    const Vector u = s.dual_argmax(as_span(g));
    std::copy(u.data(), u.data() + d, out.begin());
  };
  const NuReport r = estimate_nu_adversarial(draw, d, s, 1000, 100000, 8);
  CHECK(r.nu_point <= 2 * d * 1.05);
}

TEST_CASE("degenerate direction gives infinite nu") {
  const VectorDraw zero = [](CounterRng&, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  const NuReport r = estimate_nu_adversarial(zero, 2, NormSpec::euclidean(2), 1000, 1000, 1);
  CHECK(r.infinite);
  CHECK(std::isinf(r.nu));
}

TEST_CASE("calibration constant") {
  const auto s = SamplerSpec::gaussian(identity(10), 0);
  const CalibrationConstant c = calibrate_constant(
      [](const CalibrationConstant& cal) {
        BoundCertificate b;
        b.bound_value = cal.C * 2;
        b.confidence_t = 1;
        return b;
      },
      s, NormSpec::sup(10), 10000, 0.99, 4, "probe");
  CHECK(c.family == "probe");
  CHECK(c.seed == 4);
  const auto v = sample_norms(s, NormSpec::sup(10), 10000, 4);
  const QuantileCI q = quantile_ci_sorted(v, 1 - std::exp(-1.0), 0.99);
  CHECK(c.C == doctest::Approx(q.hi / 2).epsilon(1e-14));
}
