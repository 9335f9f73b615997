#include "tailcert/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailcert/errors.hpp"
#include "tailcert/parallel.hpp"
#include "tailcert/stats.hpp"

namespace tailcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kChunk = 4096;

// Probability slack when testing |⟨U,x⟩| ≥ 1 on boundary points.
constexpr double kEdge = 1e-12;

// Largest l in [0, n] with P(K ≤ l − 1) ≤ a, K ∼ Bin(n, q).
std::int64_t lower_index(std::int64_t n, double q, double a) {
  std::int64_t lo = 0, hi = n;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    if (binomial_cdf(mid - 1, n, q) <= a) lo = mid;
    else hi = mid - 1;
  }
  return lo;
}

// Smallest u in [1, n + 1] with P(K ≥ u) ≤ a.
std::int64_t upper_index(std::int64_t n, double q, double a) {
  std::int64_t lo = 1, hi = n + 1;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (1.0 - binomial_cdf(mid - 1, n, q) <= a) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

void check_norm_matches(const SamplerSpec& s, const NormSpec& norm) {
  if (s.out_dim() != norm.dim())
    throw ConfigError("sampler output dimension " + std::to_string(s.out_dim()) + " does not match norm dimension " +
                      std::to_string(norm.dim()));
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::covered: return "covered";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "covered") return Verdict::covered;
  if (s == "violated") return Verdict::violated;
  if (s == "inconclusive") return Verdict::inconclusive;
  throw DomainError("unknown verdict '" + s + "'");
}

QuantileCI quantile_ci_sorted(const std::vector<double>& sorted, double level, double conf) {
  if (!(level > 0 && level < 1)) throw DomainError("empirical_quantile_ci: level must lie in (0, 1)");
  if (!(conf > 0 && conf < 1)) throw DomainError("empirical_quantile_ci: conf must lie in (0, 1)");
  const auto n = static_cast<std::int64_t>(sorted.size());
  if (n < 100) throw DomainError("empirical_quantile_ci: need at least 100 values");
  const double a = 0.5 * (1 - conf);
  auto k = static_cast<std::int64_t>(std::ceil(level * n - 1e-9));
  k = std::clamp<std::int64_t>(k, 1, n);
  QuantileCI q;
  q.point = sorted[k - 1];
  const std::int64_t l = lower_index(n, level, a);
  const std::int64_t u = upper_index(n, level, a);
  q.lo = l >= 1 ? sorted[l - 1] : -kInf;
  q.hi = u <= n ? sorted[u - 1] : kInf;
  return q;
}

QuantileCI empirical_quantile_ci(std::vector<double> values, double level, double conf) {
  for (double v : values)
    if (std::isnan(v)) throw DomainError("empirical_quantile_ci: NaN value");
  std::sort(values.begin(), values.end());
  return quantile_ci_sorted(values, level, conf);
}

Verdict verdict_for(double bound, double ci_lo, double ci_hi) {
  if (ci_hi <= bound) return Verdict::covered;
  if (ci_lo > bound) return Verdict::violated;
  return Verdict::inconclusive;
}

std::vector<double> sample_norms(const SamplerSpec& sampler, const NormSpec& norm, std::int64_t n_mc,
                                 std::uint64_t seed) {
  sampler.validate();
  check_norm_matches(sampler, norm);
  if (n_mc < 1) throw DomainError("sample_norms: n_mc must be >= 1");
  const std::int64_t chunks = (n_mc + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> parts(chunks);
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t len = std::min(kChunk, n_mc - begin);
    Sampler s(sampler, mix_seed(seed, c));
    std::vector<double> x(sampler.out_dim());
    auto& out = parts[c];
    out.resize(len);
    for (std::int64_t i = 0; i < len; ++i) {
      s.draw(x);
      out[i] = norm.norm(x);
    }
    std::sort(out.begin(), out.end());
  });
  // Sorted merge of the per-chunk blocks.
  std::vector<double> all;
  all.reserve(n_mc);
  for (auto& p : parts) {
    const auto mid = static_cast<std::ptrdiff_t>(all.size());
    all.insert(all.end(), p.begin(), p.end());
    std::inplace_merge(all.begin(), all.begin() + mid, all.end());
  }
  return all;
}

VerificationReport certify(const BoundCertificate& cert, const SamplerSpec& sampler, const NormSpec& norm,
                           std::int64_t n_mc, double conf, std::uint64_t seed) {
  if (!(cert.confidence_t > 0)) throw DomainError("certify: certificate needs t > 0");
  const std::vector<double> norms = sample_norms(sampler, norm, n_mc, seed);
  const QuantileCI q = quantile_ci_sorted(norms, -std::expm1(-cert.confidence_t), conf);
  VerificationReport r;
  r.certificate = cert;
  r.empirical_quantile = q.point;
  r.ci_lo = q.lo;
  r.ci_hi = q.hi;
  r.n_samples = n_mc;
  r.seed = seed;
  r.d = sampler.out_rows() > 1 ? sampler.out_rows() : sampler.out_dim();
  r.n = sampler.n;
  r.verdict = verdict_for(cert.bound_value, q.lo, q.hi);
  return r;
}

VerificationReport certify_values(const BoundCertificate& cert, std::vector<double> values, double conf,
                                  std::uint64_t seed) {
  if (!(cert.confidence_t > 0)) throw DomainError("certify: certificate needs t > 0");
  const auto n = static_cast<std::int64_t>(values.size());
  const QuantileCI q = empirical_quantile_ci(std::move(values), -std::expm1(-cert.confidence_t), conf);
  VerificationReport r;
  r.certificate = cert;
  r.empirical_quantile = q.point;
  r.ci_lo = q.lo;
  r.ci_hi = q.hi;
  r.n_samples = n;
  r.seed = seed;
  r.verdict = verdict_for(cert.bound_value, q.lo, q.hi);
  return r;
}

namespace {

using BlockDraw = std::function<Matrix(std::uint64_t seed, int count)>;

NuReport nu_adversarial_impl(const BlockDraw& block, int dim, const NormSpec& norm, int x_search_budget,
                             int mc_budget, std::uint64_t seed, double conf) {
  if (norm.is_matrix()) throw DomainError("estimate_nu_adversarial: vector norms only");
  if (dim != norm.dim()) throw ConfigError("estimate_nu_adversarial: dimension mismatch");
  if (x_search_budget < 1000 || mc_budget < 1000)
    throw DomainError("estimate_nu_adversarial: budgets must be >= 1000");
  if (!(conf > 0 && conf < 1)) throw DomainError("estimate_nu_adversarial: conf must lie in (0, 1)");

  auto draw_set = [&](std::uint64_t s) {
    Matrix U(mc_budget, dim);
    const int chunks = (mc_budget + static_cast<int>(kChunk) - 1) / static_cast<int>(kChunk);
    parallel_for(chunks, [&](std::size_t c) {
      const int begin = static_cast<int>(c) * static_cast<int>(kChunk);
      const int len = std::min(mc_budget - begin, static_cast<int>(kChunk));
      U.middleRows(begin, len) = block(mix_seed(s, c), len);
    });
    return U;
  };
  auto hits = [](const Matrix& U, const Vector& x) {
    const Vector ip = U * x;
    std::int64_t c = 0;
    for (Eigen::Index i = 0; i < ip.size(); ++i)
      if (std::fabs(ip(i)) >= 1 - kEdge) ++c;
    return c;
  };
  auto to_boundary = [&](Vector x) -> Vector {
    const double nx = norm.norm(as_span(x));
    if (!(nx > 0)) return Vector();
    return x / nx;
  };

  // Common random numbers: set A drives the search, set B re-estimates.
  const Matrix A = draw_set(mix_seed(seed, 1));
  CounterRng rng(mix_seed(seed, 3));

  std::vector<Vector> starts;
  if (norm.kind() == NormKind::sup || norm.kind() == NormKind::polyhedral) {
    // Faces and vertex-like points of ∂B are natural worst cases.
    const Matrix& V = norm.vertices();
    for (Eigen::Index i = 0; i < V.rows() && static_cast<int>(starts.size()) < x_search_budget / 4; ++i) {
      Vector x = to_boundary(V.row(i).transpose());
      if (x.size()) starts.push_back(std::move(x));
    }
  }
  const int n_random = x_search_budget / 2 - static_cast<int>(starts.size());
  for (int i = 0; i < n_random; ++i) {
    Vector z(dim);
    for (int j = 0; j < dim; ++j) z(j) = rng.normal();
    Vector x = to_boundary(z);
    if (x.size()) starts.push_back(std::move(x));
  }
  if (starts.empty()) throw NumericError("estimate_nu_adversarial: no boundary points");

  std::vector<std::int64_t> counts(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { counts[i] = hits(A, starts[i]); });
  std::size_t best_i = std::min_element(counts.begin(), counts.end()) - counts.begin();
  Vector best = starts[best_i];
  std::int64_t best_count = counts[best_i];

  // Local random search around the incumbent with a shrinking step.
  double step = 0.5;
  int remaining = x_search_budget - static_cast<int>(starts.size());
  int since_improve = 0;
  while (remaining-- > 0 && best_count > 0) {
    Vector z(dim);
    for (int j = 0; j < dim; ++j) z(j) = best(j) + step * rng.normal();
    Vector x = to_boundary(z);
    if (!x.size()) continue;
    const std::int64_t c = hits(A, x);
    if (c < best_count) {
      best_count = c;
      best = std::move(x);
      since_improve = 0;
    } else if (++since_improve >= 20) {
      step = std::max(step * 0.5, 1e-4);
      since_improve = 0;
    }
  }

  NuReport r;
  r.worst_x = best;
  r.trials = mc_budget;
  if (best_count == 0) {
    r.infinite = true;
    r.nu = r.nu_point = r.ci_lo = kInf;
    return r;
  }
  const Matrix B = draw_set(mix_seed(seed, 2));
  const std::int64_t k = hits(B, best);
  r.successes = k;
  if (k == 0) {
    r.infinite = true;
    r.nu = r.nu_point = kInf;
    r.ci_lo = 1 / clopper_pearson_upper(0, mc_budget, 1 - conf);
    return r;
  }
  const double a = 1 - conf;
  r.nu = std::max(1.0, 1 / clopper_pearson_lower(k, mc_budget, a));
  r.nu_point = std::max(1.0, static_cast<double>(mc_budget) / k);
  r.ci_lo = std::max(1.0, 1 / clopper_pearson_upper(k, mc_budget, a));
  return r;
}

}  // namespace

NuReport estimate_nu_adversarial(const VectorDraw& draw_u, int dim, const NormSpec& norm, int x_search_budget,
                                 int mc_budget, std::uint64_t seed, double conf) {
  BlockDraw block = [&](std::uint64_t s, int count) {
    CounterRng rng(s);
    Matrix U(count, dim);
    std::vector<double> u(dim);
    for (int i = 0; i < count; ++i) {
      draw_u(rng, u);
      for (int j = 0; j < dim; ++j) U(i, j) = u[j];
    }
    return U;
  };
  return nu_adversarial_impl(block, dim, norm, x_search_budget, mc_budget, seed, conf);
}

NuReport estimate_nu_adversarial(const SamplerSpec& u_sampler, const NormSpec& norm, int x_search_budget,
                                 int mc_budget, std::uint64_t seed, double conf) {
  u_sampler.validate();
  if (u_sampler.is_matrix()) throw DomainError("estimate_nu_adversarial: vector samplers only");
  BlockDraw block = [&](std::uint64_t s, int count) { return Sampler(u_sampler, s).batch(count); };
  return nu_adversarial_impl(block, u_sampler.out_dim(), norm, x_search_budget, mc_budget, seed, conf);
}

ProfileCheck profile_check(const SamplerSpec& sampler, int grid_u, const std::vector<double>& grid_p,
                           std::int64_t n_mc, std::uint64_t seed) {
  sampler.validate();
  if (sampler.family == SamplerFamily::matrix_series)
    throw DomainError("profile_check: matrix_series has no directional profile");
  if (grid_u < 1 || grid_p.empty() || n_mc < 2) throw DomainError("profile_check: empty grid or sample");
  const MomentProfile& h = sampler.declared_profile;
  const CovarianceSpec& cov = sampler.covariance();
  const int d = cov.dim();
  const bool quadratic = sampler.is_matrix();

  // Directions: coordinate axes first, then Gaussian ones.
  std::vector<Vector> dirs;
  CounterRng rng(mix_seed(seed, 0));
  for (int i = 0; i < d && static_cast<int>(dirs.size()) < grid_u; ++i) dirs.push_back(Vector::Unit(d, i));
  while (static_cast<int>(dirs.size()) < grid_u) {
    Vector u(d);
    for (int j = 0; j < d; ++j) u(j) = rng.normal();
    dirs.push_back(u.normalized());
  }

  const std::int64_t chunks = (n_mc + kChunk - 1) / kChunk;
  const std::size_t np = grid_p.size(), nu = dirs.size();
  // Per chunk: Σ s^p and Σ s^{2p} for each (u, p).
  std::vector<std::vector<double>> s1(chunks, std::vector<double>(nu * np)), s2 = s1;
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t len = std::min(kChunk, n_mc - begin);
    Sampler s(sampler, mix_seed(seed, c + 1));
    Vector x(sampler.out_dim());
    for (std::int64_t i = 0; i < len; ++i) {
      s.draw({x.data(), static_cast<std::size_t>(x.size())});
      for (std::size_t a = 0; a < nu; ++a) {
        double v;
        if (quadratic) {
          const Eigen::Map<const Matrix, 0, Eigen::Stride<1, Eigen::Dynamic>> Z(x.data(), d, d,
                                                                                 Eigen::Stride<1, Eigen::Dynamic>(1, d));
          v = std::fabs(dirs[a].dot(Z * dirs[a]));
        } else {
          v = std::fabs(dirs[a].dot(x));
        }
        for (std::size_t b = 0; b < np; ++b) {
          const double m = std::pow(v, grid_p[b]);
          s1[c][a * np + b] += m;
          s2[c][a * np + b] += m * m;
        }
      }
    }
  });

  ProfileCheck out;
  for (std::size_t a = 0; a < nu; ++a) {
    const double scale = quadratic ? cov.norm_sigma(as_span(dirs[a])) * cov.norm_sigma(as_span(dirs[a]))
                                   : cov.norm_sigma(as_span(dirs[a]));
    for (std::size_t b = 0; b < np; ++b) {
      const double p = grid_p[b];
      CompensatedSum m1, m2;
      for (std::int64_t c = 0; c < chunks; ++c) {
        m1.add(s1[c][a * np + b]);
        m2.add(s2[c][a * np + b]);
      }
      const double n = static_cast<double>(n_mc);
      const double mean = m1.value() / n;
      const double var = std::max(0.0, m2.value() / n - mean * mean);
      const double se = std::sqrt(var / n);
      const double bound = std::pow(h.h(p) * scale, p);
      if (!(bound > 0)) {
        if (mean > 0) {
          out.pass = false;
          ++out.failures;
        }
        continue;
      }
      const double ratio = std::pow(mean / bound, 1 / p);
      if (ratio > out.worst_ratio) {
        out.worst_ratio = ratio;
        out.worst_p = p;
        out.worst_u = dirs[a];
      }
      if (mean - 3 * se > bound) {
        out.pass = false;
        ++out.failures;
      }
    }
  }
  return out;
}

CalibrationConstant calibrate_constant(const std::function<BoundCertificate(const CalibrationConstant&)>& bound,
                                       const SamplerSpec& sampler, const NormSpec& norm, std::int64_t n_mc,
                                       double conf, std::uint64_t seed, const std::string& family) {
  CalibrationConstant unit;
  unit.family = family;
  unit.seed = seed;
  const BoundCertificate b1 = bound(unit);
  if (!(b1.bound_value > 0) || !(b1.confidence_t > 0))
    throw DegenerateParameters("calibrate_constant: bound at C = 1 must be positive with t > 0");
  const std::vector<double> norms = sample_norms(sampler, norm, n_mc, seed);
  const QuantileCI q = quantile_ci_sorted(norms, -std::expm1(-b1.confidence_t), conf);
  CalibrationConstant c = unit;
  c.C = q.hi / b1.bound_value;
  if (!std::isfinite(c.C)) throw NumericError("calibrate_constant: quantile interval is unbounded");
  return c;
}

}  // namespace tailcert
