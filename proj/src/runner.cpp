#include "tailcert/runner.hpp"

#include <cmath>
#include <limits>

#include "tailcert/coupling.hpp"
#include "tailcert/errors.hpp"
#include "tailcert/matrix_bounds.hpp"
#include "tailcert/parallel.hpp"
#include "tailcert/pushforward.hpp"
#include "tailcert/vector_bounds.hpp"

namespace tailcert {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t bound_seed(const JobSpec& job) { return mix_seed(job.seed, 0); }
std::uint64_t mc_seed(const JobSpec& job, std::size_t ti) { return mix_seed(job.seed, 1 + ti); }

SamplerSpec default_gaussian(int d) {
  return SamplerSpec::gaussian(std::make_shared<CovarianceSpec>(CovarianceSpec::identity(d)), 0);
}

SamplerSpec job_sampler(const JobSpec& job) {
  if (job.sampler) return *job.sampler;
  return default_gaussian(job.norm->dim());
}

std::vector<int> k_range(const JobSpec& job) {
  if (!job.k_range.empty()) return job.k_range;
  std::vector<int> k;
  for (int i = 1; i <= std::min(8, job.norm->vertex_count()); ++i) k.push_back(i);
  return k;
}

// (η₁, η₂) of the mixed profile η₁√p + η₂p.
std::pair<double, double> gamma_etas(const MomentProfile& h) {
  switch (h.kind) {
    case ProfileKind::sub_gaussian: return {h.eta, 0.0};
    case ProfileKind::sub_exponential: return {0.0, h.eta};
    case ProfileKind::sub_gamma: return {h.eta, h.eta2};
    default: throw ConfigError("pushforward: unsupported profile " + h.describe());
  }
}

CouplingSpec build_coupling(const JobSpec& job) {
  const CouplingJob& c = *job.coupling;
  if (c.builtin == "identity") {
    const NormSpec norm = *job.norm;
    return identity_coupling(*job.sampler, [norm](std::span<const double> x) { return norm.norm(x); });
  }
  if (c.builtin == "shifted-gaussian") return shifted_gaussian_coupling(0);
  return example2_coupling(c.sigmas, c.b, c.theta, 0);
}

// n draws of (F(X), Y) from the coupling.
void draw_pairs(const CouplingSpec& cp, int n, std::uint64_t seed, std::vector<double>* f, std::vector<double>* y) {
  Sampler xs(cp.x_sampler, mix_seed(seed, 0));
  CounterRng rng(mix_seed(seed, 1));
  std::vector<double> x(xs.out_dim());
  for (int i = 0; i < n; ++i) {
    xs.draw(x);
    if (f) f->push_back(cp.F(x));
    if (y) y->push_back(cp.conditional_y(x, rng));
  }
}

BoundCertificate coupling_bound(const JobSpec& job, const CouplingSpec& cp, double t) {
  const CouplingJob& c = *job.coupling;
  const NuEstimate nu = nu_F_estimate(cp, c.n_x, c.n_y, mix_seed(bound_seed(job), 1));
  std::vector<double> y;
  draw_pairs(cp, c.n_y_moment, mix_seed(bound_seed(job), 2), nullptr, &y);
  const std::vector<double> grid = default_b_grid(y);
  BoundCertificate cert = coupling_tail_bound(empirical_y_log_moment(std::move(y)), nu.nu, t, grid, ScalarSearchDomain{});
  cert.flag("empirical-moment");
  for (const auto& f : nu.flags) cert.flag(f);
  cert.diagnostics["nu_point"] = nu.nu_point;
  return cert;
}

}  // namespace

BoundCertificate compute_bound(const JobSpec& job, double t) {
  switch (job.method) {
    case Method::linf_gaussian:
      return linf_gaussian_bound(job.norm->dim(), t);
    case Method::polyhedral: {
      PolyhedralOptions opt;
      opt.seed = bound_seed(job);
      return polyhedral_bound(*job.norm, t, k_range(job), opt);
    }
    case Method::theorem2:
      return theorem2_bound(*job.profile, *job.cov, t);
    case Method::corollary_subgauss:
      return closed_form_euclidean(EuclideanClosedForm::sub_gaussian, job.profile->eta, *job.cov, t);
    case Method::corollary_subexp:
      return closed_form_euclidean(EuclideanClosedForm::sub_exponential, job.profile->eta, *job.cov, t);
    case Method::pushforward: {
      const auto [e1, e2] = gamma_etas(*job.profile);
      Theorem3Options opt;
      opt.seed = bound_seed(job);
      return theorem3_bound(*job.cov, *job.norm, e1, e2, t, opt);
    }
    case Method::psd_sum:
      return psd_sum_bound(job.profile->eta, *job.cov, job.sampler->n, t, *job.calibration);
    case Method::sample_cov:
      return sample_cov_bound(job.profile->eta, *job.cov, job.sampler->n, t, *job.calibration);
    case Method::matrix_series: {
      const SeriesStats st = series_stats(job.sampler->A_list, {}, bound_seed(job));
      return series_bound(st, *job.profile, t, *job.calibration);
    }
    case Method::coupling:
      return coupling_bound(job, build_coupling(job), t);
    case Method::lemma1_generic:
      break;
  }
  throw ConfigError("method " + to_string(job.method) + " is library-only");
}

std::vector<ReportRow> run_job(const JobSpec& job) {
  std::vector<ReportRow> rows;
  for (std::size_t ti = 0; ti < job.t_grid.size(); ++ti) {
    const double t = job.t_grid[ti];
    ReportRow row;
    row.method = to_string(job.method);
    row.t = t;
    row.report.seed = mc_seed(job, ti);
    try {
      BoundCertificate cert = compute_bound(job, t);
      if (job.halve_bound) {
        cert.bound_value *= 0.5;
        cert.flag("halved-bound");
      }
      if (job.method == Method::coupling) {
        const CouplingSpec cp = build_coupling(job);
        std::vector<double> f;
        draw_pairs(cp, static_cast<int>(job.n_mc), row.report.seed, &f, nullptr);
        row.report = certify_values(cert, std::move(f), job.conf, row.report.seed);
        row.report.d = Sampler(cp.x_sampler).out_dim();
        row.report.n = 1;
      } else {
        row.report = certify(cert, job_sampler(job), *job.norm, job.n_mc, job.conf, row.report.seed);
      }
    } catch (const Error& e) {
      row.error = e.what();
      row.report.certificate.method = job.method;
      row.report.certificate.confidence_t = t;
      row.report.certificate.bound_value = kNaN;
      row.report.empirical_quantile = row.report.ci_lo = row.report.ci_hi = kNaN;
      if (job.norm) row.report.d = job.norm->is_matrix() ? job.norm->rows() : job.norm->dim();
      row.report.n = job.sampler ? job.sampler->n : 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

RunResult run_config(const ExperimentConfig& config, const RunOptions& opt) {
  std::vector<JobSpec> jobs = config.jobs;
  if (opt.seed_override)
    for (JobSpec& j : jobs) j.seed = mix_seed(*opt.seed_override, j.seed);
  std::vector<std::vector<ReportRow>> per_job(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) { per_job[i] = run_job(jobs[i]); }, std::max(1u, opt.workers));
  RunResult r;
  bool violated = false, failed = false;
  for (auto& rows : per_job)
    for (auto& row : rows) {
      if (!row.error.empty()) failed = true;
      else if (row.report.verdict == Verdict::violated) violated = true;
      r.rows.push_back(std::move(row));
    }
  r.exit_code = violated ? kExitViolations : failed ? kExitNumeric : kExitOk;
  return r;
}

}  // namespace tailcert
