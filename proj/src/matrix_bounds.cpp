#include "tailcert/matrix_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "tailcert/errors.hpp"
#include "tailcert/parallel.hpp"
#include "tailcert/rng.hpp"

namespace tailcert {

namespace {

double cnp_term(int n, double p, double q) {
  return std::exp(std::log(p) + std::log(q) + (std::log(static_cast<double>(n)) - std::log(p)) / q);
}

void check_np(int n, double p) {
  if (n < 1) throw DomainError("latala_Cnp: n must be >= 1");
  if (!(p >= 2) || !std::isfinite(p)) throw DomainError("latala_Cnp: p must be finite and >= 2");
}

void check_common(double eta, const CovarianceSpec& cov, int n, double t, const CalibrationConstant& cal) {
  if (!(eta >= 1)) throw DomainError("matrix bound: eta must be >= 1");
  if (n < 1) throw DomainError("matrix bound: n must be >= 1");
  if (!(t >= 0)) throw DomainError("matrix bound: t must be >= 0");
  if (!(cal.C > 0)) throw DomainError("matrix bound: calibration constant must be > 0");
  if (!(cov.op() >= 0)) throw DomainError("matrix bound: invalid covariance");
}

BoundCertificate calibrated(Method m, double t, const CalibrationConstant& cal) {
  BoundCertificate c;
  c.method = m;
  c.confidence_t = t;
  c.constant_mode = ConstantMode::calibrated;
  c.calibration = cal;
  return c;
}

}  // namespace

double latala_Cnp(int n, double p) {
  check_np(n, p);
  const double lo = std::max(2.0, p / n);
  return std::max(cnp_term(n, p, lo), cnp_term(n, p, p));
}

double latala_Cnp_grid(int n, double p, int points) {
  check_np(n, p);
  if (points < 2) throw DomainError("latala_Cnp_grid: need at least 2 points");
  const double lo = std::max(2.0, p / n);
  double best = 0;
  for (int i = 0; i < points; ++i) {
    const double q = i == points - 1 ? p : lo + (p - lo) * i / (points - 1);
    best = std::max(best, cnp_term(n, p, q));
  }
  return best;
}

BoundCertificate psd_sum_bound(double eta, const CovarianceSpec& cov, int n, double t,
                               const CalibrationConstant& cal) {
  check_common(eta, cov, n, t, cal);
  BoundCertificate c = calibrated(Method::psd_sum, t, cal);
  const double op = cov.op();
  if (op == 0) return c;
  const double r = cov.r_eff();
  c.bound_value = cal.C * eta * op * std::sqrt((2 * r + t) / n) * std::max(1.0, std::sqrt((r + t / 2) / n));
  c.diagnostics["r_eff"] = r;
  return c;
}

BoundCertificate sample_cov_bound(double eta, const CovarianceSpec& cov, int n, double t,
                                  const CalibrationConstant& cal) {
  check_common(eta, cov, n, t, cal);
  BoundCertificate c = calibrated(Method::sample_cov, t, cal);
  const double op = cov.op();
  if (op == 0) return c;
  const double r = cov.r_eff();
  const double n3 = std::cbrt(static_cast<double>(n));
  const double a = r + t + std::log(8.0);
  const double b = n3 + t + std::log(8.0);
  const double first = std::max(a * a / n, std::sqrt(a / n));
  const double second = std::max(b * b / n, r * b / n);
  const bool use_first = r <= n3;
  const double scale = cal.C * eta * eta * op;
  c.bound_value = scale * (use_first ? first : second);
  c.diagnostics["r_eff"] = r;
  c.diagnostics["branch"] = use_first ? 1 : 2;
  c.diagnostics["branch1_value"] = scale * first;
  c.diagnostics["branch2_value"] = scale * second;
  c.diagnostics["branch_gap"] = scale * (second - first);
  return c;
}

SeriesStats series_stats(const std::vector<Matrix>& A_list, const SeriesBudgets& budgets,
                         std::uint64_t seed) {
  if (A_list.empty()) throw DomainError("series_stats: empty matrix list");
  const int n = static_cast<int>(A_list.size());
  const int d1 = static_cast<int>(A_list[0].rows());
  const int d2 = static_cast<int>(A_list[0].cols());
  for (const Matrix& A : A_list) {
    if (A.rows() != d1 || A.cols() != d2) throw DomainError("series_stats: matrices differ in shape");
    if (!A.allFinite()) throw DomainError("series_stats: non-finite entries");
  }
  if (budgets.restarts < 1 || budgets.sweeps < 1) throw DomainError("series_stats: budgets must be >= 1");

  SeriesStats st;
  st.n = n;
  st.d1 = d1;
  st.d2 = d2;

  Matrix AtA = Matrix::Zero(d2, d2), AAt = Matrix::Zero(d1, d1);
  double fro2 = 0;
  Matrix stacked(n, d1 * d2);
  for (int i = 0; i < n; ++i) {
    const Matrix& A = A_list[i];
    AtA.noalias() += A.transpose() * A;
    AAt.noalias() += A * A.transpose();
    fro2 += A.squaredNorm();
    stacked.row(i) = Eigen::Map<const Eigen::RowVectorXd>(A.data(), d1 * d2);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> e1(AtA, Eigen::EigenvaluesOnly), e2(AAt, Eigen::EigenvaluesOnly);
  st.sigma = std::sqrt(std::max(0.0, e1.eigenvalues().maxCoeff())) + std::sqrt(std::max(0.0, e2.eigenvalues().maxCoeff()));
  st.sigma_diamond = std::sqrt(fro2);

  // sup_w ‖Σ w_i A_i‖_F is the top singular value of the n × (d₁d₂) stack.
  Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
  st.upsilon = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  if (st.sigma_diamond == 0) return st;

  const Vector w_top = svd.matrixU().col(0);
  std::vector<double> values(budgets.restarts, 0.0);
  parallel_for(budgets.restarts, [&](std::size_t r) {
    CounterRng rng(mix_seed(seed, r));
    Vector w(n);
    if (r == 0) {
      w = w_top;
    } else {
      for (int i = 0; i < n; ++i) w(i) = rng.normal();
      w.normalize();
    }
    double val = 0;
    Vector coef(n);
    for (int s = 0; s < budgets.sweeps; ++s) {
      Matrix M = Matrix::Zero(d1, d2);
      for (int i = 0; i < n; ++i) M += w(i) * A_list[i];
      Eigen::JacobiSVD<Matrix> ms(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vector u = ms.matrixU().col(0), v = ms.matrixV().col(0);
      for (int i = 0; i < n; ++i) coef(i) = u.dot(A_list[i] * v);
      const double nv = coef.norm();
      if (nv == 0) break;
      w = coef / nv;
      const bool stalled = nv - val <= budgets.stagnation * std::max(1.0, nv);
      val = std::max(val, nv);
      if (stalled) break;
    }
    values[r] = val;
  });
  st.sigma_star = *std::max_element(values.begin(), values.end());
  st.restarts = budgets.restarts;
  return st;
}

BoundCertificate series_bound(const SeriesStats& stats, const MomentProfile& profile, double t,
                              const CalibrationConstant& cal) {
  if (!profile.gaussian_relative) throw DomainError("series_bound: needs a Gaussian-relative moment profile");
  if (!(t >= 0)) throw DomainError("series_bound: t must be >= 0");
  if (!(cal.C > 0)) throw DomainError("series_bound: calibration constant must be > 0");
  BoundCertificate c = calibrated(Method::matrix_series, t, cal);
  const double ss = stats.sigma_star, s = stats.sigma, u = stats.upsilon, sd = stats.sigma_diamond;
  if (ss == 0 && s == 0 && u == 0 && sd == 0) return c;

  ScalarSearchDomain dom;
  dom.lo = std::max(2.0, profile.domain_lo);
  dom.hi = std::min(1e4, profile.domain_hi());
  if (!(dom.hi >= dom.lo)) throw DomainError("series_bound: profile undefined on p >= 2");
  auto obj = [&](double p) {
    return t / p + profile.log_h(p) + std::log(ss * std::sqrt(p) + s + u + sd / std::sqrt(p));
  };
  const ScalarMinimum m = minimize_scalar(obj, dom);
  c.bound_value = cal.C * std::exp(m.value);
  c.optimal_params["p"] = m.argmin;

  const bool constant_h = profile.kind == ProfileKind::power && profile.alpha == 0;
  if (constant_h && ss > 0) {
    const double pc = 2 * t + 2 * sd / ss;
    if (pc >= dom.lo && pc <= dom.hi) {
      c.diagnostics["closed_path_p"] = pc;
      c.diagnostics["closed_path_value"] = cal.C * std::exp(obj(pc));
    }
    c.diagnostics["closed_path_shape"] = cal.C * (s + u + std::sqrt(sd * ss) + std::sqrt(2 * t) * ss);
  }
  return c;
}

}  // namespace tailcert
