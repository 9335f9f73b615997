#include "tailcert/vector_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tailcert/errors.hpp"
#include "tailcert/stats.hpp"

namespace tailcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BoundCertificate lemma1_bound(const LogMomentFn& log_moment, double nu, double t,
                              const ScalarSearchDomain& domain) {
  if (!(nu >= 1)) throw DomainError("lemma1_bound: nu must be >= 1");
  if (!(t >= 0)) throw DomainError("lemma1_bound: t must be >= 0");
  const double log_nu = std::log(nu);
  auto obj = [&](double p) { return (t + log_moment(p) + log_nu) / p; };
  const ScalarMinimum m = minimize_scalar(obj, domain);
  BoundCertificate c;
  c.method = Method::lemma1_generic;
  c.confidence_t = t;
  c.bound_value = std::exp(m.value);
  c.optimal_params["p"] = m.argmin;
  c.diagnostics["nu"] = nu;
  c.diagnostics["evaluations"] = m.evaluations;
  return c;
}

BoundCertificate theorem2_bound(const MomentProfile& profile, const CovarianceSpec& cov, double t) {
  if (!(t > 0)) throw DomainError("theorem2_bound: t must be > 0");
  BoundCertificate c;
  c.method = Method::theorem2;
  c.confidence_t = t;
  ScalarSearchDomain dom;
  dom.lo = std::max(2.0, profile.domain_lo);
  dom.hi = std::min(1e4, profile.domain_hi());
  if (!(dom.hi >= dom.lo)) throw DomainError("theorem2_bound: profile undefined on p >= 2");

  bool all_zero = true;
  for (int i = 0; i < 64 && all_zero; ++i) {
    const double p = dom.lo * std::pow(dom.hi / dom.lo, i / 63.0);
    if (profile.h(p) != 0) all_zero = false;
  }
  if (all_zero) {
    c.bound_value = 0;
    c.optimal_params["p"] = dom.lo;
    return c;
  }
  const double tr = cov.trace(), op = cov.op();
  auto obj = [&](double p) {
    return M_LN2 - 0.5 * std::log(p) + profile.log_h(p) + 0.5 * std::log(tr + 0.5 * p * op) +
           (t + M_LN2) / p;
  };
  const ScalarMinimum m = minimize_scalar(obj, dom);
  c.bound_value = std::exp(m.value);
  c.optimal_params["p"] = m.argmin;
  return c;
}

BoundCertificate closed_form_euclidean(EuclideanClosedForm kind, double eta,
                                       const CovarianceSpec& cov, double t) {
  if (!(eta >= 1)) throw DomainError("closed_form_euclidean: the corollary assumes eta >= 1");
  BoundCertificate c;
  c.confidence_t = t;
  const double tr = cov.trace(), op = cov.op();
  if (kind == EuclideanClosedForm::sub_gaussian) {
    if (!(t > 0)) throw DomainError("closed_form_euclidean: sub-Gaussian form needs t > 0");
    c.method = Method::corollary_subgauss;
    c.bound_value = 6.0 * eta * std::sqrt(tr + t * op);
  } else {
    if (!(t >= 1)) throw DomainError("closed_form_euclidean: sub-exponential form holds for t >= 1 only");
    c.method = Method::corollary_subexp;
    c.bound_value = 4.0 * std::sqrt(M_E) * eta * (std::sqrt(t * tr) + t * std::sqrt(op));
    c.optimal_params["p"] = 2 * t;
  }
  return c;
}

VertexMasses vertex_masses(const NormSpec& norm, int mc_budget, std::uint64_t seed, double alpha) {
  if (norm.kind() != NormKind::sup && norm.kind() != NormKind::polyhedral)
    throw DomainError("vertex_masses: needs sup or polyhedral norm");
  const int N = norm.vertex_count();
  const int d = norm.dim();
  VertexMasses vm;
  vm.point.assign(N, 0.0);
  vm.lower.assign(N, 0.0);
  vm.counts.assign(N, 0);
  if (norm.is_canonical_linf()) {
    // Exchangeability of the coordinates of G makes every signed vertex
    // equally likely.
    vm.exact = true;
    for (int i = 0; i < N; ++i) vm.point[i] = vm.lower[i] = 0.5 / N;
    return vm;
  }
  if (mc_budget < 1) throw DomainError("vertex_masses: mc_budget must be >= 1");
  CounterRng rng(seed);
  std::vector<double> g(d);
  for (int s = 0; s < mc_budget; ++s) {
    for (int j = 0; j < d; ++j) g[j] = rng.normal();
    ++vm.counts[norm.dual_argmax_index(g) / 2];
  }
  vm.n = mc_budget;
  const double a = alpha / N;
  for (int i = 0; i < N; ++i) {
    vm.point[i] = 0.5 * static_cast<double>(vm.counts[i]) / mc_budget;
    vm.lower[i] = 0.5 * clopper_pearson_lower(vm.counts[i], mc_budget, a);
  }
  return vm;
}

double polyhedral_ck(const NormSpec& norm, int k, int search_budget, std::uint64_t seed,
                     Vector* minimizer, bool* exact) {
  if (norm.kind() != NormKind::sup && norm.kind() != NormKind::polyhedral)
    throw DomainError("polyhedral_ck: needs sup or polyhedral norm");
  const Matrix& U = norm.vertices();
  const int N = static_cast<int>(U.rows());
  const int d = norm.dim();
  if (k < 1 || k > N) throw DomainError("polyhedral_ck: k must be in [1, N]");

  if (norm.is_canonical_linf()) {
    if (exact) *exact = true;
    // At x = e_1 ∈ ∂B only one coordinate is non-zero.
    if (minimizer) *minimizer = U.row(0).transpose();
    return k == 1 ? 1.0 : kInf;
  }
  if (exact) *exact = k == 1;

  std::vector<double> buf(N);
  auto ratio = [&](const Vector& x) {
    const Vector ux = U * x;
    double mx = 0;
    for (int i = 0; i < N; ++i) {
      buf[i] = std::fabs(ux(i));
      mx = std::max(mx, buf[i]);
    }
    if (mx == 0) return kInf;
    std::nth_element(buf.begin(), buf.begin() + (k - 1), buf.end(), std::greater<double>());
    return buf[k - 1] / mx;
  };
  auto to_boundary = [&](Vector x) {
    const double n = (U * x).cwiseAbs().maxCoeff();
    return Vector(x / n);
  };

  if (k == 1) {
    if (minimizer) *minimizer = to_boundary(U.row(0).transpose());
    return 1.0;
  }

  CounterRng rng(seed);
  double best = kInf;
  Vector best_x = Vector::Zero(d);
  const int starts = N + std::max(1, search_budget);
  for (int s = 0; s < starts; ++s) {
    Vector x(d);
    if (s < N) {
      x = U.row(s).transpose();
    } else {
      for (int j = 0; j < d; ++j) x(j) = rng.normal();
    }
    double fx = ratio(x);
    double step = 0.25 * x.norm();
    int guard = 0;
    while (step > 1e-10 * x.norm() && guard++ < 4000) {
      bool improved = false;
      for (int j = 0; j < 2 * d + 2 && !improved; ++j) {
        Vector dir = Vector::Zero(d);
        if (j < 2 * d) {
          dir(j / 2) = (j % 2 == 0) ? 1.0 : -1.0;
        } else {
          for (int q = 0; q < d; ++q) dir(q) = rng.normal();
          dir.normalize();
        }
        const Vector y = x + step * dir;
        const double fy = ratio(y);
        if (fy < fx) {
          x = y;
          fx = fy;
          improved = true;
        }
      }
      if (!improved) step *= 0.5;
    }
    if (fx < best) {
      best = fx;
      best_x = x;
    }
  }
  if (minimizer) *minimizer = to_boundary(best_x);
  return best > 1e-12 ? 1.0 / best : kInf;
}

PolyhedralConstants polyhedral_constants(const NormSpec& norm, int k, int mc_budget,
                                         int search_budget, std::uint64_t seed) {
  const int N = norm.vertex_count();
  if (k < 1 || k > N) throw DomainError("polyhedral_constants: k must be in [1, N]");
  PolyhedralConstants pc;
  pc.k = k;
  pc.search_budget = search_budget;
  pc.c_k = polyhedral_ck(norm, k, search_budget, mix_seed(seed, 1), &pc.minimizer, &pc.c_exact);
  const VertexMasses vm = vertex_masses(norm, mc_budget, mix_seed(seed, 2));
  pc.pi_exact = vm.exact;
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vm.lower[a] < vm.lower[b]; });
  CompensatedSum s;
  for (int j = 0; j < k; ++j) {
    s.add(vm.lower[order[j]]);
    if (!vm.exact && vm.counts[order[j]] == 0) pc.pi_floor = true;
  }
  pc.pi_k = s.value();
  return pc;
}

BoundCertificate polyhedral_bound(const NormSpec& norm, double t, const std::vector<int>& k_range,
                                  const PolyhedralOptions& opt) {
  if (!(t >= 0)) throw DomainError("polyhedral_bound: t must be >= 0");
  const int N = norm.vertex_count();
  std::vector<int> ks = k_range;
  if (ks.empty()) {
    ks.resize(N);
    std::iota(ks.begin(), ks.end(), 1);
  }
  for (int k : ks)
    if (k < 1 || k > N) throw DomainError("polyhedral_bound: k out of range");

  const VertexMasses vm = vertex_masses(norm, opt.mc_budget, mix_seed(opt.seed, 2));
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vm.lower[a] < vm.lower[b]; });
  const Vector unorm = norm.vertices().rowwise().norm();
  const double umax = unorm.maxCoeff();

  // Weights 2P(U = ρ₀u_i) normalized to sum to one.
  std::vector<double> logw(N);
  {
    double tot = 0;
    for (int i = 0; i < N; ++i) tot += vm.point[i];
    for (int i = 0; i < N; ++i) logw[i] = vm.point[i] > 0 ? std::log(vm.point[i] / tot) : -kInf;
  }

  BoundCertificate c;
  c.method = Method::polyhedral;
  c.confidence_t = t;
  c.bound_value = kInf;
  bool any_floor = false;
  bool c_heuristic = false;
  for (int k : ks) {
    bool c_exact = false;
    const double ck = polyhedral_ck(norm, k, opt.search_budget, mix_seed(opt.seed, 1), nullptr, &c_exact);
    if (!c_exact) c_heuristic = true;
    CompensatedSum s;
    bool floor = false;
    for (int j = 0; j < k; ++j) {
      s.add(vm.lower[order[j]]);
      if (!vm.exact && vm.counts[order[j]] == 0) floor = true;
    }
    const double pik = s.value();
    any_floor = any_floor || floor;
    if (!std::isfinite(ck) || !(pik > 0)) continue;

    const double simplified =
        std::sqrt(2 * M_E) * umax * ck * std::max(1.0, std::sqrt(t - std::log(pik)));

    std::vector<double> terms(N);
    auto obj = [&](double p) {
      for (int i = 0; i < N; ++i) terms[i] = logw[i] + 2 * p * std::log(unorm(i));
      const double lse = log_sum_exp(terms);
      return t / (2 * p) + 0.5 * std::log(2 * p) + lse / (2 * p) + std::log(ck) - std::log(pik) / (2 * p);
    };
    ScalarSearchDomain dom;
    dom.lo = 1;
    dom.hi = 1e4;
    const ScalarMinimum m = minimize_scalar(obj, dom);
    const double weighted = std::exp(m.value);

    const double best = std::min(simplified, weighted);
    if (best < c.bound_value) {
      c.bound_value = best;
      c.optimal_params.clear();
      c.optimal_params["k"] = k;
      c.optimal_params["rho0"] = ck;
      if (weighted < simplified) c.optimal_params["p"] = m.argmin;
      c.diagnostics["c_k"] = ck;
      c.diagnostics["pi_k"] = pik;
      c.diagnostics["simplified"] = simplified;
      c.diagnostics["weighted"] = weighted;
    }
  }
  if (!std::isfinite(c.bound_value)) throw NumericError("polyhedral_bound: every k gave a vacuous bound");
  if (c_heuristic) c.flag("heuristic-c_k");
  if (any_floor) c.flag("pi-confidence-floor");
  if (!vm.exact) c.diagnostics["mc_budget"] = opt.mc_budget;
  return c;
}

BoundCertificate linf_gaussian_bound(int d, double t) {
  if (d < 1) throw DomainError("linf_gaussian_bound: d must be >= 1");
  if (!(t >= 0)) throw DomainError("linf_gaussian_bound: t must be >= 0");
  const double L = std::log(2.0 * d) + t;
  BoundCertificate c;
  c.method = Method::linf_gaussian;
  c.confidence_t = t;
  // inf_{p≥1} e^{L/(2p)} √(2p) is attained at p = L when L ≥ 1.
  if (L >= 1) {
    c.bound_value = std::sqrt(2 * M_E * L);
    c.optimal_params["p"] = L;
  } else {
    c.bound_value = std::sqrt(2.0) * std::exp(0.5 * L);
    c.optimal_params["p"] = 1;
  }
  c.optimal_params["k"] = 1;
  c.optimal_params["rho0"] = 1;
  return c;
}

}  // namespace tailcert
