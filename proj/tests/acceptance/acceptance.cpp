// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "tailcert/core_math.hpp"
#include "tailcert/coupling.hpp"
#include "tailcert/matrix_bounds.hpp"
#include "tailcert/pushforward.hpp"
#include "tailcert/rng.hpp"
#include "tailcert/vector_bounds.hpp"
#include "tailcert/verify.hpp"

using namespace tailcert;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::shared_ptr<CovarianceSpec> shared(CovarianceSpec c) { return std::make_shared<CovarianceSpec>(std::move(c)); }

CovarianceSpec diag_4_then_ones(int d) {
  Vector v = Vector::Ones(d);
  v(0) = 4;
  return CovarianceSpec::diagonal(v);
}

CovarianceSpec random_spd(int d, std::uint64_t seed) {
  CounterRng rng(seed);
  Matrix W(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) W(i, j) = rng.normal();
  Matrix S = W * W.transpose() / d + 0.1 * Matrix::Identity(d, d);
  return CovarianceSpec(0.5 * (S + S.transpose()));
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome c1() {
  Outcome o;
  double worst_rel = 0;
  int covered = 0, cells = 0;
  for (int d : {10, 100, 1000}) {
    auto cov = shared(CovarianceSpec::identity(d));
    const SamplerSpec s = SamplerSpec::gaussian(cov, 0);
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
      const BoundCertificate b = linf_gaussian_bound(d, t);
      const double want = oracle::linf_gaussian(d, t);
      worst_rel = std::max(worst_rel, std::fabs(b.bound_value - want) / want);
      const auto r = certify(b, s, NormSpec::sup(d), 100000, 0.99, mix_seed(101, cells));
      covered += r.verdict == Verdict::covered;
      ++cells;
    }
  }
  o.ok = worst_rel <= 1e-10 && covered == cells;
  o.detail = "max rel err " + fmt("%.2e", worst_rel) + ", covered " + std::to_string(covered) + "/" + std::to_string(cells);
  return o;
}

Outcome c2() {
  Outcome o;
  const MomentProfile h = MomentProfile::power(std::sqrt(2 / M_PI), 0.5);
  std::vector<CovarianceSpec> covs{CovarianceSpec::identity(8), diag_4_then_ones(16), random_spd(32, 202)};
  double worst_ratio = 0;
  int covered = 0, cells = 0;
  for (const auto& cov : covs) {
    auto sc = shared(cov);
    for (double t : {1.0, 2.0, 4.0}) {
      const BoundCertificate b = theorem2_bound(h, cov, t);
      worst_ratio = std::max(worst_ratio, b.bound_value / oracle::euclid_reference(cov.trace(), cov.op(), t));
      const auto r = certify(b, SamplerSpec::gaussian(sc, 0), NormSpec::euclidean(cov.dim()), 100000, 0.99,
                             mix_seed(202, cells));
      covered += r.verdict == Verdict::covered;
      ++cells;
    }
  }
  o.ok = worst_ratio <= 5 && covered == cells;
  o.detail = "max bound/(sqrt(tr)+sqrt(2t op)) " + fmt("%.4f", worst_ratio) + " (limit 5), covered " +
             std::to_string(covered) + "/" + std::to_string(cells);
  return o;
}

Outcome c3() {
  Outcome o;
  double worst = 1e300, lib_err = 0;
  for (int i = 0; i <= 10000; ++i) {
    const double z = i * 1e-3;
    const double lower = std::exp(-2 * z * z / 3) / 4;
    worst = std::min(worst, oracle::upper_tail(z) / lower);
    lib_err = std::max(lib_err, std::fabs(gaussian_cdf_lower(z) - lower) / lower);
  }
  o.ok = worst >= 1 && lib_err <= 1e-14;
  o.detail = "min Phi(-z)/(e^{-2z^2/3}/4) " + fmt("%.6f", worst) + ", library formula rel err " + fmt("%.1e", lib_err);
  return o;
}

Outcome c4() {
  Outcome o;
  CounterRng rng(404);
  int violations = 0, order_violations = 0;
  double worst = 0;
  auto mc_moments = [](const Matrix& B, std::uint64_t seed, double m[5], double se[5]) {
    const int l = static_cast<int>(B.rows());
    const int n = 1000000;
    CounterRng g(seed);
    Vector x(l);
    double s1[5] = {0}, s2[5] = {0};
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < l; ++i) x(i) = g.normal();
      const double q = std::fabs(x.dot(B * x));
      double v = 1;
      for (int p = 1; p <= 4; ++p) {
        v *= q;
        s1[p] += v;
        s2[p] += v * v;
      }
    }
    for (int p = 1; p <= 4; ++p) {
      m[p] = s1[p] / n;
      se[p] = std::sqrt(std::max(0.0, s2[p] / n - m[p] * m[p]) / n);
    }
  };
  for (int b = 0; b < 50; ++b) {
    const int l = 1 + static_cast<int>(rng.uniform() * 8);
    Matrix B(l, l);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j <= i; ++j) B(i, j) = B(j, i) = rng.normal();
    double m[5], se[5];
    mc_moments(B, mix_seed(404, b), m, se);
    for (int p = 1; p <= 4; ++p) {
      const double prod = quadratic_form_moment_bound(B, p, QuadFormMode::product);
      const double simp = quadratic_form_moment_bound(B, p, QuadFormMode::simplified);
      if (!(m[p] <= prod * (1 + 3 * se[p] / m[p]))) ++violations;
      if (!(prod <= simp * (1 + 1e-12))) ++order_violations;
      worst = std::max(worst, m[p] / prod);
    }
  }
  Matrix T = Matrix::Zero(4, 4);
  T(0, 0) = 1;
  double m[5], se[5];
  mc_moments(T, 4040, m, se);
  const double tight = quadratic_form_moment_bound(T, 2, QuadFormMode::product);
  const bool tight_ok = std::fabs(m[2] - 3) <= 0.02 * 3 && std::fabs(tight - 3) <= 1e-12;
  o.ok = violations == 0 && order_violations == 0 && tight_ok;
  o.detail = "moment violations " + std::to_string(violations) + ", product>simplified " +
             std::to_string(order_violations) + ", max MC/bound " + fmt("%.4f", worst) + ", tight case MC " +
             fmt("%.4f", m[2]) + " bound " + fmt("%.4f", tight);
  return o;
}

Outcome c5() {
  Outcome o;
  std::vector<CovarianceSpec> covs{CovarianceSpec::identity(8), diag_4_then_ones(16), random_spd(32, 505)};
  double worst_rel = 0, worst_ratio = 0;
  for (const auto& cov : covs)
    for (double t : {1.0, 2.0, 4.0}) {
      const double closed = gaussian_limit_closed_form(1.0, cov, t);
      const double want = oracle::gaussian_limit(1.0, cov.trace(), cov.op(), t);
      worst_rel = std::max(worst_rel, std::fabs(closed - want) / want);
      Theorem3Options opt;
      opt.kappa_inf = false;
      opt.interior = false;
      const BoundCertificate b = theorem3_bound(cov, NormSpec::euclidean(cov.dim()), 1.0, 0.0, t, opt);
      worst_ratio = std::max(worst_ratio, b.bound_value / closed);
    }
  Theorem3Options opt;
  opt.rho_inf = false;
  opt.interior = false;
  const NormSpec sup8 = NormSpec::sup(8);
  const BoundCertificate kinf = theorem3_bound(CovarianceSpec::identity(8), sup8, 1.0, 0.0, 1.0, opt);
  const BoundCertificate poly = polyhedral_bound(sup8, 1.0, {1, 2, 3, 4, 5, 6, 7, 8});
  const double ratio = kinf.bound_value / poly.bound_value;
  o.ok = worst_rel <= 1e-8 && worst_ratio <= 1 + 1e-12 && ratio >= 0.25 && ratio <= 4;
  o.detail = "(a) closed form rel err " + fmt("%.1e", worst_rel) + ", max optimized/closed " + fmt("%.4f", worst_ratio) +
             "; (b) kappa=inf " + fmt("%.4f", kinf.bound_value) + " / polyhedral " + fmt("%.4f", poly.bound_value) +
             " = " + fmt("%.3f", ratio);
  return o;
}

Outcome c6() {
  Outcome o;
  CounterRng rng(606);
  int dual_bad = 0, firm_bad = 0, interior_bad = 0, interior_cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + static_cast<int>(rng.uniform() * 5);
    const int kind = static_cast<int>(rng.uniform() * 3);
    std::optional<NormSpec> norm;
    if (kind == 0) norm = NormSpec::euclidean(d);
    else if (kind == 1) norm = NormSpec::sup(d);
    else {
      Matrix V(d + 2, d);
      for (int i = 0; i < V.rows(); ++i)
        for (int j = 0; j < d; ++j) V(i, j) = rng.normal();
      norm = NormSpec::polyhedral(V);
    }
    const CovarianceSpec cov = rng.uniform() < 0.3 ? CovarianceSpec::identity(d) : random_spd(d, rng.next());
    PushforwardParams pp;
    pp.kappa0 = std::exp(rng.uniform() * 4.6 - 2.3);
    pp.rho0 = std::exp(rng.uniform() * 4.6 - 2.3);
    Vector x(d), y(d);
    const double sx = std::exp(rng.uniform() * 4 - 2);
    for (int j = 0; j < d; ++j) {
      x(j) = sx * rng.normal();
      y(j) = sx * rng.normal();
    }
    const Vector gx = moreau_grad(x, cov, pp, *norm).point;
    const Vector gy = moreau_grad(y, cov, pp, *norm).point;
    if (norm->dual_norm(as_span(gx)) > pp.rho0 * (1 + 1e-8)) ++dual_bad;

    const Matrix& M = cov.sqrt();
    const Vector ax = pp.kappa0 * (cov.inv_sqrt() * x), ay = pp.kappa0 * (cov.inv_sqrt() * y);
    const Vector dg = gx - gy;
    const double lhs = dg.dot(M * dg), rhs = dg.dot(M * (ax - ay));
    const double scale = std::max(1.0, (ax - ay).dot(M * (ax - ay)));
    if (lhs > rhs + 1e-6 * scale) ++firm_bad;

    if (norm->dual_norm(as_span(ax)) < pp.rho0) {
      ++interior_cases;
      if ((gx - ax).cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, ax.cwiseAbs().maxCoeff())) ++interior_bad;
    }
  }
  o.ok = dual_bad == 0 && firm_bad == 0 && interior_bad == 0 && interior_cases > 0;
  o.detail = "dual-norm violations " + std::to_string(dual_bad) + ", firm-nonexpansive violations " +
             std::to_string(firm_bad) + ", interior mismatches " + std::to_string(interior_bad) + "/" +
             std::to_string(interior_cases);
  return o;
}

Outcome c7() {
  Outcome o;
  CounterRng rng(707);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform() * 1000);
    const double p = 2 + rng.uniform() * 98;
    const double a = latala_Cnp(n, p), b = oracle::cnp_grid(n, p, 10000);
    worst = std::max(worst, std::fabs(a - b) / b);
  }
  o.ok = worst <= 1e-9;
  o.detail = "max rel diff endpoint vs 1e4-point grid " + fmt("%.2e", worst);
  return o;
}

// Calibration on the Gaussian rank-one Wishart family, shared with c9.
constexpr std::uint64_t kCalSeed = 0xC8;
constexpr std::int64_t kCalMc = 4000;

SamplerSpec wishart(int d, int n, CoreDist core) {
  return SamplerSpec::empirical(shared(CovarianceSpec::identity(d)), n, core, 0);
}

CalibrationConstant calibrated_C() {
  static std::optional<CalibrationConstant> cached;
  if (!cached) {
    const CovarianceSpec cov = CovarianceSpec::identity(8);
    cached = calibrate_constant([&](const CalibrationConstant& c) { return psd_sum_bound(2, cov, 128, 1, c); },
                                wishart(8, 128, CoreDist::gaussian), NormSpec::symmetric_operator(8), kCalMc, 0.99,
                                kCalSeed, "gaussian-rank-one-wishart d=8 n=128 t=1");
  }
  return *cached;
}

Outcome c8() {
  Outcome o;
  const CalibrationConstant C = calibrated_C();
  struct Config {
    Method method;
    int d, n;
    double t;
    CoreDist core;
    double eta;
  };
  std::vector<Config> grid;
  for (int d : {8, 16})
    for (int n : {128, 512, 4096})
      for (double t : {1.0, 2.0})
        if (!(d == 8 && n == 128 && t == 1)) grid.push_back({Method::psd_sum, d, n, t, CoreDist::gaussian, 2});
  for (int d : {8, 16})
    for (int n : {512, 4096})
      for (double t : {1.0, 2.0}) grid.push_back({Method::sample_cov, d, n, t, CoreDist::laplace, 2});
  grid.push_back({Method::sample_cov, 8, 512, 1, CoreDist::gaussian, 1});

  int covered = 0, idx = 0;
  double needed = 0;
  std::string missed;
  CalibrationConstant unit;
  for (const Config& g : grid) {
    const CovarianceSpec cov = CovarianceSpec::identity(g.d);
    auto bound = [&](const CalibrationConstant& c) {
      return g.method == Method::psd_sum ? psd_sum_bound(g.eta, cov, g.n, g.t, c)
                                         : sample_cov_bound(g.eta, cov, g.n, g.t, c);
    };
    const BoundCertificate b = bound(C);
    const auto r = certify(b, wishart(g.d, g.n, g.core), NormSpec::symmetric_operator(g.d), 2000, 0.99,
                           mix_seed(0x808, idx++));
    needed = std::max(needed, r.ci_hi / bound(unit).bound_value);
    if (r.verdict == Verdict::covered) ++covered;
    else missed += " " + to_string(g.method) + "(d=" + std::to_string(g.d) + ",n=" + std::to_string(g.n) + ",t=" +
                   fmt("%g", g.t) + ")";
  }
  o.ok = covered >= 19 && C.C <= 32;
  o.detail = "C=" + fmt("%.4f", C.C) + ", covered " + std::to_string(covered) + "/" + std::to_string(grid.size()) +
             " (need 19), C covering the whole grid would be " + fmt("%.4f", needed) +
             (missed.empty() ? "" : "; not covered:" + missed);
  return o;
}

Outcome c9() {
  Outcome o;
  const int d = 16;
  std::vector<Matrix> A;
  for (int i = 0; i < d; ++i) {
    Matrix E = Matrix::Zero(d, d);
    E(i, i) = 1;
    A.push_back(E);
  }
  const SeriesStats st = series_stats(A);
  const double err = std::max({std::fabs(st.sigma_star - 1), std::fabs(st.upsilon - 1), std::fabs(st.sigma - 2),
                               std::fabs(st.sigma_diamond - 4)});
  MomentProfile h = MomentProfile::constant(1.0);
  h.gaussian_relative = true;
  const BoundCertificate b = series_bound(st, h, 1.0, calibrated_C());
  const auto r = certify(b, SamplerSpec::series(A, CoreDist::gaussian, 0), NormSpec::symmetric_operator(d), 100000,
                         0.99, 909);
  o.ok = err <= 1e-12 && r.verdict == Verdict::covered;
  o.detail = "stats (" + fmt("%.12g", st.sigma_star) + ", " + fmt("%.12g", st.upsilon) + ", " + fmt("%.12g", st.sigma) +
             ", " + fmt("%.12g", st.sigma_diamond) + "), quantile CI hi " + fmt("%.4f", r.ci_hi) + " vs bound " +
             fmt("%.4f", b.bound_value) + " -> " + to_string(r.verdict);
  return o;
}

Outcome c10() {
  Outcome o;
  // Identity coupling: F = Euclidean norm of a 4-dimensional Gaussian.
  auto cov = shared(CovarianceSpec::identity(4));
  const NormSpec e4 = NormSpec::euclidean(4);
  const CouplingSpec id =
      identity_coupling(SamplerSpec::gaussian(cov, 0), [&](std::span<const double> x) { return e4.norm(x); });
  const NuEstimate nu = nu_F_estimate(id, 200, 2000, 1010);
  auto draw = [&](std::uint64_t seed, bool use_y) {
    Sampler s(id.x_sampler, seed);
    CounterRng rng(mix_seed(seed, 1));
    std::vector<double> out, x(4);
    for (int i = 0; i < 100000; ++i) {
      s.draw(x);
      out.push_back(use_y ? id.conditional_y(x, rng) : id.F(x));
    }
    return out;
  };
  const std::vector<double> fy = draw(1011, false), yy = draw(1012, true);
  const double b = 1.5, p = 2;
  auto mean_se = [&](const std::vector<double>& v) {
    double s1 = 0, s2 = 0;
    for (double u : v) {
      const double w = std::pow(std::max(0.0, u - b), p);
      s1 += w;
      s2 += w * w;
    }
    const double m = s1 / v.size();
    return std::pair{m, std::sqrt((s2 / v.size() - m * m) / v.size())};
  };
  const auto [mf, sf] = mean_se(fy);
  const auto [my, sy] = mean_se(yy);
  const double lib_my = std::exp(empirical_y_log_moment(yy)(p, b));
  const bool moments_ok = std::fabs(mf - my) <= 3.29 * std::hypot(sf, sy) && std::fabs(lib_my - my) <= 1e-9 * my;

  // Heterogeneous ℓ∞: σ_i = i^{-1/2}, d = 100.
  std::vector<double> sig;
  Vector var(100);
  for (int i = 1; i <= 100; ++i) {
    sig.push_back(1 / std::sqrt(static_cast<double>(i)));
    var(i - 1) = 1.0 / i;
  }
  const double closed = hetero_linf_bound(sig, HeteroMode::closed_form).bound_value;
  const double optimized = hetero_linf_bound(sig, HeteroMode::optimized).bound_value;
  const std::vector<double> norms =
      sample_norms(SamplerSpec::gaussian(shared(CovarianceSpec::diagonal(var)), 0), NormSpec::sup(100), 100000, 1013);
  double mean = 0;
  for (double v : norms) mean += v;
  mean /= norms.size();
  const bool ex2_ok = std::fabs(closed - oracle::hetero_closed(sig)) <= 1e-12 * closed && mean <= closed &&
                      optimized <= closed * (1 + 1e-12);
  o.ok = nu.nu_point == 1 && nu.zero_success_probes == 0 && moments_ok && ex2_ok;
  o.detail = "identity nu_point " + fmt("%.6f", nu.nu_point) + " (conservative " + fmt("%.4f", nu.nu) +
             "), E(Y-b)+^2 " + fmt("%.5f", my) + " vs E(F-b)+^2 " + fmt("%.5f", mf) + "; E||X||inf " +
             fmt("%.4f", mean) + " <= 2s*+sqrt2 s1 = " + fmt("%.4f", closed) + " (optimized " +
             fmt("%.4f", optimized) + ")";
  return o;
}

Outcome c11() {
  Outcome o;
  double worst = 0;
  std::string parts;
  for (double kappa : {0.5, 1.0, 2.0}) {
    const SamplerSpec u = SamplerSpec::gaussian(shared(CovarianceSpec::identity(4).scaled(kappa * kappa)), 0);
    const NuReport r = estimate_nu_adversarial(u, NormSpec::euclidean(4), 1000, 400000, mix_seed(1111, kappa * 8));
    const double want = oracle::nu_gaussian_euclid(kappa);
    const double rel = std::fabs(r.nu - want) / want;
    worst = std::max(worst, rel);
    parts += " k=" + fmt("%g", kappa) + ": " + fmt("%.4f", r.nu) + " vs " + fmt("%.4f", want) + ";";
  }
  o.ok = worst <= 0.05;
  o.detail = "max rel err " + fmt("%.4f", worst) + " (limit 0.05);" + parts;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{{1, 30, c1},  {2, 60, c2},  {3, 1, c3},   {4, 120, c4},
                                   {5, 120, c5}, {6, 60, c6},  {7, 10, c7},  {8, 600, c8},
                                   {9, 300, c9}, {10, 60, c10}, {11, 60, c11}};
  int failed = 0;
  for (const Criterion& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.ok && in_time;
    failed += !pass;
    std::printf("criterion %2d: %s  %s [%.1fs of %.0fs]\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                c.limit_s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
