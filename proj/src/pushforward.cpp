#include "tailcert/pushforward.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>
#include <optional>

#include "tailcert/errors.hpp"
#include "tailcert/kernels.hpp"
#include "tailcert/parallel.hpp"
#include "tailcert/rng.hpp"
#include "tailcert/simplex.hpp"
#include "tailcert/stats.hpp"

namespace tailcert {

namespace {

bool is_l1_dual(const NormSpec& norm) {
  return norm.kind() == NormKind::sup || norm.is_canonical_linf();
}

void require_vector_norm(const NormSpec& norm, const CovarianceSpec& cov, const char* who) {
  const NormKind k = norm.kind();
  if (k != NormKind::euclidean && k != NormKind::sup && k != NormKind::polyhedral)
    throw DomainError(std::string(who) + ": needs a euclidean, sup or polyhedral norm");
  if (norm.dim() != cov.dim()) throw DomainError(std::string(who) + ": dimension mismatch");
}

Vector ball_projection(const Vector& v, double rho, const NormSpec& norm) {
  if (norm.kind() == NormKind::euclidean) {
    const double n = v.norm();
    return n <= rho ? v : Vector(v * (rho / n));
  }
  return project_l1_ball(v, rho);
}

double dual_norm_fast(const NormSpec& norm, const Vector& v) {
  if (norm.kind() == NormKind::euclidean) return v.norm();
  if (is_l1_dual(norm)) return kernels::sum_abs(v.data(), v.size());
  return norm.dual_norm(as_span(v));
}

// ½(u−a)ᵀM(u−a) over ρB_* by projected gradient with Euclidean sub-projection.
ProjectionResult projected_gradient(const Vector& a, double rho, const Matrix& M, double L,
                                    const NormSpec& norm) {
  ProjectionResult r;
  Vector u = ball_projection(a, rho, norm);
  const double scale = std::max(1.0, rho);
  double step = 0;
  int it = 0;
  for (; it < 10000; ++it) {
    const Vector g = M * (u - a);
    Vector un = ball_projection(u - g / L, rho, norm);
    step = (un - u).norm();
    u.swap(un);
    if (step <= 1e-14 * scale) break;
  }
  if (step > 1e-6 * scale) throw NumericError("moreau_grad: projected gradient did not converge", step);
  r.point = std::move(u);
  r.iterations = it + 1;
  r.residual = step;
  return r;
}

// Fully corrective Frank-Wolfe over the signed vertices ±ρu_i: the vertex
// oracle grows an active set, and Wolfe's minor cycles re-solve the problem
// exactly over the hull of that set.
ProjectionResult frank_wolfe(const Vector& a, double rho, const Matrix& M, const NormSpec& norm) {
  const Matrix& U = norm.vertices();
  auto vertex = [&](int j) -> Vector {
    return (j % 2 == 0 ? rho : -rho) * U.row(j / 2).transpose();
  };
  const Vector Ma = M * a;
  const double mv = norm.max_vertex_l2();
  const double L = M.norm();
  const double scale = std::max({1e-300, rho * mv * Ma.norm(), rho * rho * mv * mv * L});
  const double tol = 1e-12 * scale;

  std::vector<int> S{norm.dual_argmax_index(as_span(Ma))};
  std::vector<double> lam{1.0};
  std::vector<Vector> W{vertex(S[0]) - a};  // active vertices minus a
  auto combine = [&] {
    Vector x = Vector::Zero(a.size());
    for (std::size_t i = 0; i < S.size(); ++i) x += lam[i] * W[i];
    return x;
  };
  Vector x = W[0];
  double gap = 0;
  int it = 0;
  for (; it < 1000; ++it) {
    const Vector g = M * x;
    const Vector ng = -g;
    const int js = norm.dual_argmax_index(as_span(ng));
    const Vector ws = vertex(js) - a;
    gap = g.dot(x - ws);
    if (gap <= tol) break;
    if (std::find(S.begin(), S.end(), js) != S.end()) break;
    S.push_back(js);
    lam.push_back(0.0);
    W.push_back(ws);

    for (int minor = 0; minor < 100; ++minor) {
      const int k = static_cast<int>(S.size());
      Matrix K(k + 1, k + 1);
      for (int i = 0; i < k; ++i) {
        const Vector MWi = M * W[i];
        for (int j = 0; j < k; ++j) K(i, j) = W[j].dot(MWi);
        K(i, k) = K(k, i) = 1.0;
      }
      K(k, k) = 0.0;
      Vector rhs = Vector::Zero(k + 1);
      rhs(k) = 1.0;
      const Vector mu = K.completeOrthogonalDecomposition().solve(rhs);
      bool interior = true;
      for (int i = 0; i < k; ++i) interior = interior && mu(i) > 1e-14;
      if (interior) {
        for (int i = 0; i < k; ++i) lam[i] = mu(i);
        break;
      }
      double theta = 1.0;
      for (int i = 0; i < k; ++i)
        if (mu(i) <= 1e-14 && lam[i] - mu(i) > 0) theta = std::min(theta, lam[i] / (lam[i] - mu(i)));
      for (int i = 0; i < k; ++i) lam[i] += theta * (mu(i) - lam[i]);
      for (int i = k - 1; i >= 0; --i)
        if (lam[i] <= 1e-14) {
          S.erase(S.begin() + i);
          lam.erase(lam.begin() + i);
          W.erase(W.begin() + i);
        }
      if (S.empty()) throw NumericError("moreau_grad: Frank-Wolfe active set collapsed", gap);
    }
    double total = 0;
    for (double l : lam) total += l;
    for (double& l : lam) l /= total;
    x = combine();
  }
  if (gap > 1e-6 * scale) throw NumericError("moreau_grad: Frank-Wolfe duality gap above tolerance", gap);
  ProjectionResult r;
  r.point = x + a;
  r.iterations = it + 1;
  r.residual = std::max(0.0, gap);
  return r;
}

}  // namespace

void PushforwardParams::validate() const {
  if (!(kappa0 > 0)) throw DomainError("pushforward: kappa0 must be > 0");
  if (!(rho0 >= 0)) throw DomainError("pushforward: rho0 must be >= 0");
  if (std::isinf(kappa0) && std::isinf(rho0)) throw DomainError("pushforward: kappa0 and rho0 cannot both be infinite");
  if (!(tau > 0 && tau <= 1)) throw DomainError("pushforward: tau must lie in (0, 1]");
  if (!(p >= 1)) throw DomainError("pushforward: p must be >= 1");
}

Vector project_l1_ball(const Vector& v, double r) {
  if (!(r >= 0)) throw DomainError("project_l1_ball: radius must be >= 0");
  const double l1 = v.cwiseAbs().sum();
  if (l1 <= r) return v;
  if (r == 0) return Vector::Zero(v.size());
  std::vector<double> mu(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) mu[i] = std::fabs(v(i));
  std::sort(mu.begin(), mu.end(), std::greater<double>());
  double cum = 0, theta = 0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    cum += mu[k];
    const double th = (cum - r) / static_cast<double>(k + 1);
    if (mu[k] - th > 0) theta = th;
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::max(std::fabs(v(i)) - theta, 0.0);
    out(i) = v(i) >= 0 ? m : -m;
  }
  return out;
}

ProjectionResult project_dual_ball(const Vector& a, double rho, const CovarianceSpec& cov,
                                   const NormSpec& norm) {
  require_vector_norm(norm, cov, "project_dual_ball");
  if (a.size() != norm.dim()) throw DomainError("project_dual_ball: dimension mismatch");
  if (!(rho >= 0) || std::isinf(rho)) throw DomainError("project_dual_ball: rho must be finite and >= 0");
  ProjectionResult r;
  if (rho == 0) {
    r.point = Vector::Zero(a.size());
    r.boundary = true;
    return r;
  }
  const double dn = dual_norm_fast(norm, a);
  if (dn <= rho) {
    r.point = a;
    r.boundary = dn >= rho * (1 - 1e-9);
    return r;
  }
  if (norm.kind() == NormKind::euclidean || is_l1_dual(norm)) {
    if (cov.is_scaled_identity()) {
      r.point = ball_projection(a, rho, norm);
      r.iterations = 1;
    } else {
      r = projected_gradient(a, rho, cov.sqrt(), std::sqrt(cov.op()), norm);
    }
  } else {
    r = frank_wolfe(a, rho, cov.is_scaled_identity() ? Matrix(Matrix::Identity(a.size(), a.size())) : cov.sqrt(), norm);
  }
  r.boundary = true;
  return r;
}

ProjectionResult moreau_grad(const Vector& x, const CovarianceSpec& cov,
                             const PushforwardParams& params, const NormSpec& norm) {
  params.validate();
  require_vector_norm(norm, cov, "moreau_grad");
  if (x.size() != norm.dim()) throw DomainError("moreau_grad: dimension mismatch");
  ProjectionResult r;
  if (std::isinf(params.kappa0)) {
    r.point = params.rho0 * norm.dual_argmax(as_span(x));
    r.boundary = true;
    return r;
  }
  const Vector a = params.kappa0 * (cov.inv_sqrt() * x);
  if (std::isinf(params.rho0)) {
    r.point = a;
    return r;
  }
  return project_dual_ball(a, params.rho0, cov, norm);
}

DualTail::DualTail(const NormSpec& norm, int mc_budget, std::uint64_t seed, double alpha)
    : d_(norm.dim()), alpha_(alpha) {
  const NormKind k = norm.kind();
  if (k != NormKind::euclidean && k != NormKind::sup && k != NormKind::polyhedral)
    throw DomainError("DualTail: needs a euclidean, sup or polyhedral norm");
  if (k == NormKind::euclidean) {
    exact_ = true;
    return;
  }
  if (mc_budget < 1) throw DomainError("DualTail: mc_budget must be >= 1");
  CounterRng rng(seed);
  Vector g(d_);
  sorted_.resize(mc_budget);
  for (int s = 0; s < mc_budget; ++s) {
    for (int j = 0; j < d_; ++j) g(j) = rng.normal();
    sorted_[s] = dual_norm_fast(norm, g);
  }
  std::sort(sorted_.begin(), sorted_.end());
}

TailValue DualTail::operator()(double s) const {
  TailValue v;
  if (s <= 0) return v;  // ‖G‖_* ≥ 0 surely
  if (exact_) {
    v.geq = boost::math::gamma_q(0.5 * d_, 0.5 * s * s);
    v.geq_upper = v.geq;
    v.lt_upper = 1.0 - v.geq;
    return v;
  }
  const auto n = static_cast<std::int64_t>(sorted_.size());
  const auto below = static_cast<std::int64_t>(std::lower_bound(sorted_.begin(), sorted_.end(), s) - sorted_.begin());
  const std::int64_t c = n - below;
  v.geq = static_cast<double>(c) / n;
  v.geq_upper = clopper_pearson_upper(c, n, alpha_);
  v.lt_upper = clopper_pearson_upper(below, n, alpha_);
  v.half_width = std::max(v.geq_upper - v.geq, (1.0 - v.geq) - clopper_pearson_lower(below, n, alpha_));
  return v;
}

TailValue dual_tail_T(double s, const NormSpec& norm, int mc_budget, std::uint64_t seed) {
  if (!(s >= 0)) throw DomainError("dual_tail_T: s must be >= 0");
  return DualTail(norm, mc_budget, seed)(s);
}

double omega_eval(const PushforwardParams& params, const CovarianceSpec& cov, double eta1,
                  double eta2, const NormSpec& norm, const DualTail& tails, double* tau_out) {
  params.validate();
  if (!(eta1 >= 0 && eta2 >= 0)) throw DomainError("omega_eval: eta1, eta2 must be >= 0");
  if (tau_out) *tau_out = 1.0;
  if (eta1 == 0 && eta2 == 0) return 0.0;
  const double p = params.p, k = params.kappa0, rho = params.rho0;
  double gamma_term = 0;
  if (eta2 > 0) {
    if (std::isinf(rho)) return kInfinity;
    gamma_term = 2 * eta2 * p * rho;
  }
  if (eta1 == 0) return gamma_term;

  const double tr = cov.trace(), op = cov.op();
  const double sp = std::sqrt(p);
  if (std::isinf(rho)) return eta1 * sp * k * (std::sqrt(tr) + std::sqrt(2 * p * op)) + gamma_term;
  const double A = rho * std::sqrt(cov.box_norm(norm));
  if (std::isinf(k)) return eta1 * sp * A + gamma_term;

  const double c1 = std::pow(op, 0.25) * std::sqrt(cov.trace_sqrt());
  const double c2 = std::sqrt(tr);
  const double c3 = std::sqrt(2 * p * op);
  auto bracket = [&](double tau) {
    const TailValue tv = tails(rho / (tau * k));
    const double lo = tv.geq_upper > 0 ? std::exp(std::log(tv.geq_upper) / (2 * p)) * A : 0.0;
    const double hi = tv.lt_upper > 0
                          ? std::exp(std::log(tv.lt_upper) / (4 * p)) * k * ((1 - tau) * c1 + tau * c2 + c3)
                          : 0.0;
    return lo + hi;
  };
  ScalarSearchDomain dom;
  dom.lo = 1e-6;
  dom.hi = 1.0;
  dom.tolerance = 1e-6;
  const ScalarMinimum m = minimize_scalar(bracket, dom);
  double inner = m.value;
  if (A <= inner) {
    inner = A;
    if (tau_out) *tau_out = std::numeric_limits<double>::quiet_NaN();
  } else if (tau_out) {
    *tau_out = m.argmin;
  }
  const double out = eta1 * sp * inner + gamma_term;
  if (!std::isfinite(out)) throw NumericError("omega_eval: non-finite value");
  return out;
}

double gaussian_excess_mean(double s) {
  if (!(s > 0)) return 0.0;
  if (std::isinf(s)) return kInfinity;
  const double z = 1.0 / s;
  // 2(sφ(z) − Φ(−z)) = 2φ(z)/z·(1 − zΦ(−z)/φ(z)); the bracket loses all
  // precision for large z, where its asymptotic series is used instead.
  if (z <= 12) return std::max(0.0, 2 * (s * gaussian_pdf(z) - gaussian_cdf(-z)));
  const double w = 1.0 / (z * z);
  const double series = w * (1 + w * (-3 + w * (15 + w * (-105 + w * (945 + w * (-10395 + w * 135135))))));
  return 2 * gaussian_pdf(z) / z * series;
}

namespace {

// min over x ∈ ∂B of Σ_i q_i(ρ|⟨u_i,x⟩| − 1)₊, one LP per facet ⟨u_k,x⟩ = 1.
double polyhedral_lambda_lp(const Matrix& U, const std::vector<double>& q, double rho, Vector* argmin) {
  const int N = static_cast<int>(U.rows());
  const int d = static_cast<int>(U.cols());
  const int nv = 2 * d + N + 4 * N;
  const int m = 4 * N + 1;
  Matrix A = Matrix::Zero(m, nv);
  Vector b(m), c = Vector::Zero(nv);
  for (int i = 0; i < N; ++i) {
    c(2 * d + i) = q[i];
    const int sl = 2 * d + N + 4 * i;
    for (int j = 0; j < d; ++j) {
      const double uij = U(i, j);
      A(4 * i, j) = -rho * uij;
      A(4 * i, d + j) = rho * uij;
      A(4 * i + 1, j) = rho * uij;
      A(4 * i + 1, d + j) = -rho * uij;
      A(4 * i + 2, j) = uij;
      A(4 * i + 2, d + j) = -uij;
      A(4 * i + 3, j) = -uij;
      A(4 * i + 3, d + j) = uij;
    }
    A(4 * i, 2 * d + i) = 1;
    A(4 * i + 1, 2 * d + i) = 1;
    A(4 * i, sl) = -1;
    A(4 * i + 1, sl + 1) = -1;
    A(4 * i + 2, sl + 2) = 1;
    A(4 * i + 3, sl + 3) = 1;
    b(4 * i) = -1;
    b(4 * i + 1) = -1;
    b(4 * i + 2) = 1;
    b(4 * i + 3) = 1;
  }
  b(m - 1) = 1;
  double best = kInfinity;
  for (int k = 0; k < N; ++k) {
    A.row(m - 1).setZero();
    A.row(m - 1).head(d) = U.row(k);
    A.row(m - 1).segment(d, d) = -U.row(k);
    const LpResult r = solve_standard_lp(A, b, c);
    if (r.status != LpStatus::optimal) continue;
    if (r.value < best) {
      best = r.value;
      if (argmin) *argmin = r.x.head(d) - r.x.segment(d, d);
    }
  }
  if (!std::isfinite(best)) throw NumericError("lambda: every facet LP failed");
  return std::max(0.0, best);
}

struct PooledMasses {
  std::vector<double> q;  // lower bounds on P(U ∈ {±ρu_i})
  bool exact = false;
};

PooledMasses pooled_masses(const NormSpec& norm, const CovarianceSpec& cov, int budget,
                           std::uint64_t seed) {
  const int N = norm.vertex_count();
  const int d = norm.dim();
  PooledMasses pm;
  pm.q.assign(N, 0.0);
  if (norm.is_canonical_linf() && cov.is_scaled_identity()) {
    pm.exact = true;
    std::fill(pm.q.begin(), pm.q.end(), 1.0 / N);
    return pm;
  }
  std::vector<std::int64_t> counts(N, 0);
  CounterRng rng(seed);
  Vector g(d);
  const Matrix& S = cov.sqrt();
  for (int s = 0; s < budget; ++s) {
    for (int j = 0; j < d; ++j) g(j) = rng.normal();
    const Vector x = S * g;
    ++counts[norm.dual_argmax_index(as_span(x)) / 2];
  }
  const double a = 1e-3 / N;
  for (int i = 0; i < N; ++i) pm.q[i] = clopper_pearson_lower(counts[i], budget, a);
  return pm;
}

// Samples of U = ∇f₀(Σ^{1/2}G) as rows.
Matrix pushforward_samples(const PushforwardParams& params, const CovarianceSpec& cov,
                           const NormSpec& norm, int n, std::uint64_t seed) {
  const int d = norm.dim();
  Matrix out(n, d);
  CounterRng rng(seed);
  Vector g(d);
  for (int s = 0; s < n; ++s) {
    for (int j = 0; j < d; ++j) g(j) = rng.normal();
    if (std::isinf(params.kappa0)) {
      out.row(s) = params.rho0 * norm.dual_argmax(as_span(Vector(cov.sqrt() * g))).transpose();
    } else {
      // x = Σ^{1/2}g gives κ₀Σ^{-1/2}x = κ₀g.
      out.row(s) = project_dual_ball(params.kappa0 * g, params.rho0, cov, norm).point.transpose();
    }
  }
  return out;
}

double excess_mean(const Matrix& Us, const Vector& x, double* se = nullptr) {
  const Vector v = Us * x;
  const auto n = v.size();
  double sum = 0, sq = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = std::max(std::fabs(v(i)) - 1.0, 0.0);
    sum += e;
    sq += e * e;
  }
  const double m = sum / n;
  if (se) *se = n > 1 ? std::sqrt(std::max(0.0, (sq / n - m * m) / (n - 1))) : kInfinity;
  return m;
}

// Random-restart pattern search for min over x ∈ ∂B of the empirical λ.
Vector search_boundary_min(const Matrix& Us, const NormSpec& norm, int restarts, std::uint64_t seed) {
  const int d = norm.dim();
  CounterRng rng(seed);
  auto f = [&](const Vector& y) {
    const double n = norm.norm(as_span(y));
    if (!(n > 0)) return kInfinity;
    return excess_mean(Us, y / n);
  };
  std::vector<Vector> starts;
  for (int j = 0; j < d; ++j) starts.push_back(Vector::Unit(d, j));
  if (norm.kind() == NormKind::polyhedral)
    for (int i = 0; i < norm.vertex_count(); ++i) starts.push_back(norm.vertices().row(i).transpose());
  for (int r = 0; r < restarts; ++r) {
    Vector y(d);
    for (int j = 0; j < d; ++j) y(j) = rng.normal();
    starts.push_back(y);
  }
  double best = kInfinity;
  Vector best_y = starts.front();
  for (Vector y : starts) {
    y /= norm.norm(as_span(y));
    double fy = f(y);
    double step = 0.25;
    int guard = 0;
    while (step > 1e-6 && guard++ < 2000) {
      bool improved = false;
      for (int j = 0; j < 2 * d + 2 && !improved; ++j) {
        Vector dir = Vector::Zero(d);
        if (j < 2 * d) {
          dir(j / 2) = (j % 2 == 0) ? 1.0 : -1.0;
        } else {
          for (int q = 0; q < d; ++q) dir(q) = rng.normal();
          dir.normalize();
        }
        Vector z = y + step * dir;
        const double n = norm.norm(as_span(z));
        if (!(n > 0)) continue;
        z /= n;
        const double fz = f(z);
        if (fz < fy) {
          y = z;
          fy = fz;
          improved = true;
        }
      }
      if (!improved) step *= 0.5;
    }
    if (fy < best) {
      best = fy;
      best_y = y;
    }
  }
  return best_y / norm.norm(as_span(best_y));
}

}  // namespace

namespace {

LambdaNu lambda_nu_impl(const PushforwardParams& params, const CovarianceSpec& cov,
                        const NormSpec& norm, const DualTail& tails,
                        const PushforwardBudgets& budgets, std::uint64_t seed,
                        const PooledMasses* masses) {
  params.validate();
  require_vector_norm(norm, cov, "lambda_nu_eval");
  const double k = params.kappa0, rho = params.rho0;
  if (rho == 0) throw DegenerateParameters("lambda_nu_eval: rho0 = 0 gives U = 0");
  if (!std::isinf(k) && !cov.invertible())
    throw ConfigError("lambda_nu_eval: finite kappa0 needs an invertible covariance");

  LambdaNu out;
  const double rad = norm.radius_l2();
  if (std::isinf(rho)) {
    // U = κ₀G, so ⟨U,x⟩ ∼ N(0, κ₀²‖x‖₂²), minimized at the ℓ₂-closest boundary point.
    out.lambda_lower = gaussian_excess_mean(k * norm.inradius());
    out.lambda_exact = true;
    if (!(out.lambda_lower > 0)) throw DegenerateParameters("lambda_nu_eval: lambda underflows to 0");
    out.nu_bar = k * k * rad * rad / (out.lambda_lower * out.lambda_lower) + 1.0;
    if (!std::isfinite(out.nu_bar)) throw DegenerateParameters("lambda_nu_eval: nu overflows");
    return out;
  }

  if (std::isinf(k) && norm.kind() != NormKind::euclidean) {
    PooledMasses local;
    if (!masses) local = pooled_masses(norm, cov, budgets.vertex_budget, mix_seed(seed, 3));
    const PooledMasses& pm = masses ? *masses : local;
    out.lambda_exact = pm.exact;
    if (pm.exact) {
      out.lambda_lower = std::max(0.0, rho - 1.0) * pm.q[0];
      out.worst_x = norm.vertices().row(0).transpose();
    } else {
      out.lambda_lower = polyhedral_lambda_lp(norm.vertices(), pm.q, rho, &out.worst_x);
    }
  } else {
    const Matrix A = pushforward_samples(params, cov, norm, budgets.mc_budget, mix_seed(seed, 1));
    out.worst_x = search_boundary_min(A, norm, budgets.x_search_budget, mix_seed(seed, 4));
    const Matrix B = pushforward_samples(params, cov, norm, budgets.mc_budget, mix_seed(seed, 2));
    double se = 0;
    const double m = excess_mean(B, out.worst_x, &se);
    out.lambda_lower = m - 3.090232306167813 * se;
  }
  if (!(out.lambda_lower > 0))
    throw DegenerateParameters("lambda_nu_eval: lower confidence value of lambda is not positive");

  const double lam = out.lambda_lower;
  out.nu_bar = rho / lam;
  if (std::isinf(k)) {
    out.first_branch_only = true;
  } else {
    const double cond = cov.inv_op() * cov.op();
    const double T = tails(rho / k).geq_upper;
    out.nu_bar = std::min(out.nu_bar, k * k * (T * (cond - 1) + 1) * rad * rad / (lam * lam) + 1.0);
  }
  out.nu_bar = std::max(1.0, out.nu_bar);
  if (!std::isfinite(out.nu_bar)) throw DegenerateParameters("lambda_nu_eval: nu overflows");
  return out;
}

}  // namespace

LambdaNu lambda_nu_eval(const PushforwardParams& params, const CovarianceSpec& cov,
                        const NormSpec& norm, const DualTail& tails,
                        const PushforwardBudgets& budgets, std::uint64_t seed) {
  return lambda_nu_impl(params, cov, norm, tails, budgets, seed, nullptr);
}

double gaussian_limit_closed_form(double eta, const CovarianceSpec& cov, double t) {
  if (!(eta >= 0)) throw DomainError("gaussian_limit_closed_form: eta must be >= 0");
  if (!(t >= 0)) throw DomainError("gaussian_limit_closed_form: t must be >= 0");
  return 4 * std::sqrt(M_E) * eta * std::sqrt(3 * cov.trace() + 2.0 / (3.0 * M_LN2) * cov.op() * t);
}

namespace {

struct Candidate {
  double value = kInfinity;
  double kappa = 0, rho = 0, p = 1, tau = 1;
  LambdaNu ln;
  bool ok = false;
};

// inf_p e^{t/(2p)} Ω(p) ν̄^{1/(2p)} for fixed (κ₀, ρ₀), in log space.
void optimize_p(Candidate& c, const CovarianceSpec& cov, const NormSpec& norm, double eta1,
                double eta2, double t, const DualTail& tails) {
  const double log_nu = std::log(c.ln.nu_bar);
  auto obj = [&](double p) {
    PushforwardParams pp{c.kappa, c.rho, 1.0, p};
    const double om = omega_eval(pp, cov, eta1, eta2, norm, tails);
    return t / (2 * p) + std::log(om) + log_nu / (2 * p);
  };
  ScalarMinimum m{};
  try {
    m = minimize_scalar(obj, ScalarSearchDomain{});
  } catch (const SearchFailure&) {
    throw DegenerateParameters("theorem3_bound: no finite value over p");
  }
  c.value = std::exp(m.value);
  c.p = m.argmin;
  PushforwardParams pp{c.kappa, c.rho, 1.0, c.p};
  omega_eval(pp, cov, eta1, eta2, norm, tails, &c.tau);
  c.ok = std::isfinite(c.value);
}

}  // namespace

BoundCertificate theorem3_bound(const CovarianceSpec& cov, const NormSpec& norm, double eta1,
                                double eta2, double t, const Theorem3Options& opt) {
  require_vector_norm(norm, cov, "theorem3_bound");
  if (!(t >= 0)) throw DomainError("theorem3_bound: t must be >= 0");
  if (!(eta1 >= 0 && eta2 >= 0)) throw DomainError("theorem3_bound: eta1, eta2 must be >= 0");
  BoundCertificate cert;
  cert.method = Method::pushforward;
  cert.confidence_t = t;
  if (eta1 == 0 && eta2 == 0) {
    cert.bound_value = 0;
    return cert;
  }
  const DualTail tails(norm, opt.budgets.tail_budget, mix_seed(opt.seed, 7));
  int degenerate = 0, evaluated = 0;
  Candidate best;
  auto consider = [&](const Candidate& c) {
    ++evaluated;
    if (c.ok && c.value < best.value) best = c;
  };

  // ρ₀ = ∞: closed-form λ̲ and ν̄, continuous search over κ₀.
  if (opt.rho_inf && eta2 == 0 && cov.invertible()) {
    Candidate cur;
    auto over_kappa = [&](double kap) {
      Candidate c;
      c.kappa = kap;
      c.rho = kInfinity;
      try {
        c.ln = lambda_nu_eval(PushforwardParams{kap, kInfinity, 1.0, 1.0}, cov, norm, tails, opt.budgets, opt.seed);
        optimize_p(c, cov, norm, eta1, eta2, t, tails);
      } catch (const DegenerateParameters&) {
        ++degenerate;
        return kInfinity;
      }
      if (c.ok && c.value < cur.value) cur = c;
      return std::log(c.value);
    };
    ScalarSearchDomain dom;
    dom.lo = 1e-2;
    dom.hi = 1e2;
    dom.tolerance = 1e-5;
    try {
      minimize_scalar(over_kappa, dom);
    } catch (const SearchFailure&) {
    }
    consider(cur);
  }

  // κ₀ = ∞: f₀ = ρ₀‖·‖ and U is supported on ρ₀·ext(B_*).
  if (opt.kappa_inf) {
    std::optional<PooledMasses> masses;
    if (norm.kind() != NormKind::euclidean)
      masses = pooled_masses(norm, cov, opt.budgets.vertex_budget, mix_seed(opt.seed, 3));
    Candidate cur;
    auto over_rho = [&](double rho) {
      Candidate c;
      c.kappa = kInfinity;
      c.rho = rho;
      try {
        c.ln = lambda_nu_impl(PushforwardParams{kInfinity, rho, 1.0, 1.0}, cov, norm, tails, opt.budgets,
                              opt.seed, masses ? &*masses : nullptr);
        optimize_p(c, cov, norm, eta1, eta2, t, tails);
      } catch (const DegenerateParameters&) {
        ++degenerate;
        return kInfinity;
      }
      if (c.ok && c.value < cur.value) cur = c;
      return std::log(c.value);
    };
    const double r0 = 1.0 / norm.inradius();
    if (norm.kind() == NormKind::euclidean) {
      for (double m : {1.5, 2.0, 3.0, 4.0, 6.0, 8.0}) over_rho(m * r0);
    } else {
      ScalarSearchDomain dom;
      dom.lo = 1.0 + 1e-6;
      dom.hi = 1e3 * r0;
      dom.tolerance = 1e-4;
      try {
        minimize_scalar(over_rho, dom);
      } catch (const SearchFailure&) {
      }
    }
    consider(cur);
  }

  // Interior: a (κ₀, ρ₀) grid with Monte Carlo λ̲.
  if (opt.interior && cov.invertible()) {
    std::vector<double> kg = opt.kappa_grid;
    if (kg.empty())
      for (int i = 0; i < 9; ++i) kg.push_back(std::pow(10.0, -1.0 + 2.0 * i / 8.0));
    double med = std::sqrt(static_cast<double>(norm.dim()));
    if (!tails.exact()) {
      double lo = 0, hi = 1;
      while (tails(hi).geq > 0.5) hi *= 2;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tails(mid).geq > 0.5 ? lo : hi) = mid;
      }
      med = hi;
    }
    std::vector<std::pair<double, double>> grid;
    for (double kap : kg)
      for (double m : {1.0, 2.0, 4.0}) grid.emplace_back(kap, kap * m * med);
    std::vector<Candidate> results(grid.size());
    std::vector<int> degen(grid.size(), 0);
    parallel_for(grid.size(), [&](std::size_t i) {
      Candidate& c = results[i];
      c.kappa = grid[i].first;
      c.rho = grid[i].second;
      try {
        c.ln = lambda_nu_eval(PushforwardParams{c.kappa, c.rho, 1.0, 1.0}, cov, norm, tails, opt.budgets,
                              mix_seed(opt.seed, 100 + i));
        optimize_p(c, cov, norm, eta1, eta2, t, tails);
      } catch (const DegenerateParameters&) {
        degen[i] = 1;
      }
    });
    for (std::size_t i = 0; i < grid.size(); ++i) {
      degenerate += degen[i];
      consider(results[i]);
    }
  }

  if (!best.ok) throw SearchFailure("theorem3_bound: all parameter candidates are degenerate");
  cert.bound_value = best.value;
  cert.optimal_params["p"] = best.p;
  cert.optimal_params["kappa0"] = best.kappa;
  cert.optimal_params["rho0"] = best.rho;
  if (std::isfinite(best.tau)) cert.optimal_params["tau"] = best.tau;
  cert.diagnostics["lambda_lower"] = best.ln.lambda_lower;
  cert.diagnostics["nu_bar"] = best.ln.nu_bar;
  cert.diagnostics["candidates"] = evaluated;
  cert.diagnostics["degenerate"] = degenerate;
  if (!best.ln.lambda_exact) cert.flag("heuristic-lambda");
  if (!tails.exact()) cert.flag("mc-tails");
  return cert;
}

}  // namespace tailcert
