#include "tailcert/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tailcert/errors.hpp"
#include "tailcert/parallel.hpp"
#include "tailcert/stats.hpp"

namespace tailcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

CouplingSpec identity_coupling(SamplerSpec x_sampler, std::function<double(std::span<const double>)> F) {
  CouplingSpec c;
  c.x_sampler = std::move(x_sampler);
  c.F = std::move(F);
  c.conditional_y = [f = c.F](std::span<const double> x, CounterRng&) { return f(x); };
  c.name = "identity";
  return c;
}

CouplingSpec shifted_gaussian_coupling(std::uint64_t seed) {
  CouplingSpec c;
  c.x_sampler = SamplerSpec::gaussian(std::make_shared<CovarianceSpec>(CovarianceSpec::identity(1)), seed);
  c.F = [](std::span<const double> x) { return x[0]; };
  c.conditional_y = [](std::span<const double> x, CounterRng& rng) { return x[0] + rng.normal(); };
  c.name = "shifted-gaussian";
  return c;
}

CouplingSpec example2_coupling(const std::vector<double>& sigmas, double b, int theta, std::uint64_t seed) {
  const int d = static_cast<int>(sigmas.size());
  if (d < 1) throw DomainError("example2_coupling: empty sigma list");
  if (theta < 0 || theta >= d) throw DomainError("example2_coupling: theta out of range");
  Vector var(d);
  for (int i = 0; i < d; ++i) {
    if (!(sigmas[i] > 0)) throw DomainError("example2_coupling: sigmas must be positive");
    var(i) = sigmas[i] * sigmas[i];
  }
  CouplingSpec c;
  c.x_sampler = SamplerSpec::gaussian(std::make_shared<CovarianceSpec>(CovarianceSpec::diagonal(var)), seed);
  c.F = [theta, b](std::span<const double> x) { return std::fabs(x[theta]) - b; };
  c.conditional_y = [d, b](std::span<const double> x, CounterRng& rng) {
    const int j = std::min(d - 1, static_cast<int>(rng.uniform() * d));
    return std::fabs(x[j]) - b;
  };
  c.name = "example2";
  return c;
}

NuEstimate nu_F_estimate(const CouplingSpec& coupling, int n_x, int n_y_per_x, std::uint64_t seed,
                         double alpha) {
  if (!coupling.F || !coupling.conditional_y) throw DomainError("nu_F_estimate: coupling is incomplete");
  if (n_y_per_x < 100) throw DomainError("nu_F_estimate: n_y_per_x must be >= 100");
  std::vector<Vector> probes = coupling.probes;
  if (probes.empty()) {
    if (n_x < 100) throw DomainError("nu_F_estimate: n_x must be >= 100");
    Sampler s(coupling.x_sampler, mix_seed(seed, 0));
    probes.reserve(n_x);
    for (int i = 0; i < n_x; ++i) {
      Vector x(s.out_dim());
      s.draw({x.data(), static_cast<std::size_t>(x.size())});
      probes.push_back(std::move(x));
    }
  }
  const int m = static_cast<int>(probes.size());
  std::vector<std::int64_t> hits(m, 0);
  parallel_for(m, [&](std::size_t i) {
    CounterRng rng(mix_seed(seed, i + 1));
    const auto x = as_span(probes[i]);
    const double fx = coupling.F(x);
    std::int64_t c = 0;
    for (int k = 0; k < n_y_per_x; ++k)
      if (coupling.conditional_y(x, rng) >= fx) ++c;
    hits[i] = c;
  });

  NuEstimate est;
  est.probes = m;
  est.nu = 0;
  est.nu_point = 0;
  const double a = alpha / m;
  for (int i = 0; i < m; ++i) {
    if (hits[i] == 0) {
      ++est.zero_success_probes;
      continue;
    }
    est.nu_point = std::max(est.nu_point, static_cast<double>(n_y_per_x) / hits[i]);
    est.nu = std::max(est.nu, 1.0 / clopper_pearson_lower(hits[i], n_y_per_x, a));
  }
  if (est.zero_success_probes == m)
    throw DegenerateParameters("nu_F_estimate: P(Y >= F(x) | X = x) is zero at every probe; nu is unbounded");
  if (est.zero_success_probes > 0) est.flags.push_back("zero-success-probes");
  return est;
}

YLogMomentFn empirical_y_log_moment(std::vector<double> y) {
  if (y.empty()) throw DomainError("empirical_y_log_moment: empty sample");
  return [y = std::move(y)](double p, double b) {
    std::vector<double> terms;
    terms.reserve(y.size());
    for (double v : y)
      if (v > b) terms.push_back(p * std::log(v - b));
    if (terms.empty()) return -kInf;
    return log_sum_exp(terms) - std::log(static_cast<double>(y.size()));
  };
}

std::vector<double> default_b_grid(const std::vector<double>& y) {
  if (y.empty()) throw DomainError("default_b_grid: empty sample");
  std::vector<double> s = y;
  const std::size_t mid = (s.size() - 1) / 2;
  std::nth_element(s.begin(), s.begin() + mid, s.end());
  double c = std::fabs(s[mid]);
  if (!(c > 0)) c = 1.0;
  std::vector<double> grid{0.0};
  for (int k = 0; k < 32; ++k) grid.push_back(c * std::pow(2.0, (k - 16) / 4.0));
  return grid;
}

BoundCertificate coupling_tail_bound(const YLogMomentFn& y_log_moment, double nu, double t,
                                     const std::vector<double>& b_grid,
                                     const ScalarSearchDomain& p_domain) {
  if (!(nu >= 1)) throw DomainError("coupling_tail_bound: nu must be >= 1");
  if (!(t >= 0)) throw DomainError("coupling_tail_bound: t must be >= 0");
  if (b_grid.empty()) throw DomainError("coupling_tail_bound: empty b grid");
  BoundCertificate c;
  c.method = Method::coupling;
  c.confidence_t = t;
  c.bound_value = kInf;
  const double log_nu = std::log(nu);
  int failures = 0;
  for (double b : b_grid) {
    double value, p = p_domain.lo;
    if (std::isinf(y_log_moment(p_domain.lo, b)) && y_log_moment(p_domain.lo, b) < 0) {
      value = b;
    } else {
      auto obj = [&](double q) { return (t + y_log_moment(q, b) + log_nu) / q; };
      try {
        const ScalarMinimum m = minimize_scalar(obj, p_domain);
        value = b + std::exp(m.value);
        p = m.argmin;
      } catch (const SearchFailure&) {
        ++failures;
        continue;
      }
    }
    if (value < c.bound_value) {
      c.bound_value = value;
      c.optimal_params["b"] = b;
      c.optimal_params["p"] = p;
    }
  }
  if (!std::isfinite(c.bound_value)) throw SearchFailure("coupling_tail_bound: every (b, p) was non-finite");
  c.diagnostics["nu"] = nu;
  if (failures) c.diagnostics["failed_b"] = failures;
  return c;
}

std::vector<double> tail_conversion(double nu, const std::vector<double>& y,
                                    const std::vector<double>& s_grid) {
  if (!(nu >= 1)) throw DomainError("tail_conversion: nu must be >= 1");
  if (y.empty()) throw DomainError("tail_conversion: empty sample");
  std::vector<double> s = y;
  std::sort(s.begin(), s.end());
  std::vector<double> out;
  out.reserve(s_grid.size());
  for (double v : s_grid) {
    const auto below = std::lower_bound(s.begin(), s.end(), v) - s.begin();
    const double q = static_cast<double>(s.size() - below) / s.size();
    out.push_back(std::min(1.0, nu * q));
  }
  return out;
}

Measure Measure::discrete(std::vector<double> atoms, std::vector<double> weights) {
  Measure m;
  m.kind = Kind::discrete;
  m.atoms = std::move(atoms);
  m.weights = std::move(weights);
  m.validate();
  return m;
}

Measure Measure::gaussian(double mean, double variance) {
  Measure m;
  m.kind = Kind::gaussian;
  m.mean = mean;
  m.variance = variance;
  m.validate();
  return m;
}

void Measure::validate() const {
  if (kind == Kind::gaussian) {
    if (!std::isfinite(mean) || !(variance > 0) || !std::isfinite(variance))
      throw DomainError("Measure: gaussian needs finite mean and positive variance");
    return;
  }
  if (atoms.size() != weights.size() || atoms.empty()) throw DomainError("Measure: atoms and weights must match");
  double s = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw DomainError("Measure: negative weight");
    s += w;
  }
  if (std::fabs(s - 1.0) > 1e-12) throw DomainError("Measure: weights must sum to 1");
}

double renyi_divergence(const Measure& mu, const Measure& ref, double alpha) {
  if (!(alpha > 1)) throw DomainError("renyi_divergence: alpha must be > 1");
  mu.validate();
  ref.validate();
  if (mu.kind != ref.kind) throw DomainError("renyi_divergence: measures of different kinds");
  if (mu.kind == Measure::Kind::gaussian) {
    if (std::isinf(alpha)) throw DomainError("renyi_divergence: alpha = inf is unsupported for gaussians");
    const double s1 = mu.variance, s2 = ref.variance;
    const double sa = alpha * s2 + (1 - alpha) * s1;
    if (!(sa > 0)) return kInf;
    const double dm = mu.mean - ref.mean;
    return 0.5 * std::log(s2 / s1) + std::log(s2 / sa) / (2 * (alpha - 1)) + alpha * dm * dm / (2 * sa);
  }
  std::vector<double> terms;
  double dmax = -kInf;
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    if (mu.weights[i] == 0) continue;
    double r = 0;
    for (std::size_t j = 0; j < ref.atoms.size(); ++j)
      if (ref.atoms[j] == mu.atoms[i]) r += ref.weights[j];
    if (!(r > 0)) throw DomainError("renyi_divergence: mu is not absolutely continuous w.r.t. mu_ref");
    const double lm = std::log(mu.weights[i]), lr = std::log(r);
    terms.push_back(alpha * lm + (1 - alpha) * lr);
    dmax = std::max(dmax, lm - lr);
  }
  if (std::isinf(alpha)) return std::max(0.0, dmax);
  return std::max(0.0, log_sum_exp(terms) / (alpha - 1));
}

double renyi_sup_multiplier(double D_alpha, double alpha, double p) {
  if (!(D_alpha >= 0)) throw DomainError("renyi_sup_multiplier: D must be >= 0");
  if (!(alpha > 1)) throw DomainError("renyi_sup_multiplier: alpha must be > 1");
  if (!(p >= 1)) throw DomainError("renyi_sup_multiplier: p must be >= 1");
  const double ratio = std::isinf(alpha) ? 1.0 : alpha / (alpha - 1);
  return std::exp(D_alpha / p + ratio * M_LN2 / p);
}

namespace {

void check_sigmas(const std::vector<double>& sigmas) {
  if (sigmas.empty()) throw DomainError("hetero_linf: empty sigma list");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0) || !std::isfinite(sigmas[i])) throw DomainError("hetero_linf: sigmas must be positive");
    if (i > 0 && sigmas[i] > sigmas[i - 1]) throw DomainError("hetero_linf: sigmas must be sorted decreasing");
  }
}

double sigma_star(const std::vector<double>& sigmas) {
  double s = 0;
  for (std::size_t i = 0; i < sigmas.size(); ++i)
    s = std::max(s, sigmas[i] * std::sqrt(std::log(static_cast<double>(i + 2))));
  return s;
}

}  // namespace

double hetero_linf_objective(const std::vector<double>& sigmas, double b, double p) {
  check_sigmas(sigmas);
  if (!(b >= 0)) throw DomainError("hetero_linf_objective: b must be >= 0");
  if (!(p >= 1)) throw DomainError("hetero_linf_objective: p must be >= 1");
  std::vector<double> terms(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i)
    terms[i] = p * std::log(sigmas[i]) - b * b / (2 * sigmas[i] * sigmas[i]);
  // The displayed √(2p) stands for (2Γ(p/2+1))^{1/p}, which exceeds it
  // for p below about 1.4.
  const double c = std::max(std::sqrt(2 * p), std::exp((M_LN2 + std::lgamma(0.5 * p + 1)) / p));
  return b + c * std::exp(log_sum_exp(terms) / p);
}

BoundCertificate hetero_linf_bound(const std::vector<double>& sigmas, HeteroMode mode) {
  check_sigmas(sigmas);
  BoundCertificate c;
  c.method = Method::coupling;
  c.confidence_t = 0;
  const double ss = sigma_star(sigmas);
  c.diagnostics["sigma_star"] = ss;
  c.diagnostics["expectation_bound"] = 1;
  if (mode == HeteroMode::closed_form) {
    c.bound_value = 2 * ss + M_SQRT2 * sigmas[0];
    c.optimal_params["b"] = 2 * ss;
    return c;
  }
  double best_p = 1;
  auto over_b = [&](double b) {
    ScalarSearchDomain dom;
    const ScalarMinimum m = minimize_scalar([&](double p) { return hetero_linf_objective(sigmas, b, p); }, dom);
    return m.value;
  };
  ScalarSearchDomain bdom;
  bdom.lo = 0;
  bdom.hi = 2 * ss + 4 * sigmas[0];
  bdom.log_scale = false;
  bdom.tolerance = 1e-6 * bdom.hi;
  const ScalarMinimum mb = minimize_scalar(over_b, bdom);
  {
    ScalarSearchDomain dom;
    const ScalarMinimum m =
        minimize_scalar([&](double p) { return hetero_linf_objective(sigmas, mb.argmin, p); }, dom);
    best_p = m.argmin;
  }
  c.bound_value = mb.value;
  c.optimal_params["b"] = mb.argmin;
  c.optimal_params["p"] = best_p;
  return c;
}

}  // namespace tailcert
