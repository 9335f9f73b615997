#include "tailcert/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tailcert/errors.hpp"
#include "tailcert/kernels.hpp"
#include "tailcert/simplex.hpp"

namespace tailcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> as_matrix(std::span<const double> x, int r, int c) {
  return Eigen::Map<const RowMajor>(x.data(), r, c);
}

Eigen::Map<const Vector> as_vector(std::span<const double> x) {
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

Vector singular_values(std::span<const double> x, int r, int c, bool symmetric_hint) {
  const Matrix M = as_matrix(x, r, c);
  if (symmetric_hint && is_symmetric(M)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs();
  }
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues();
}

double binomial_count(int n, int k) {
  if (k < 0 || k > n) return 0;
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::euclidean: return "euclidean";
    case NormKind::sup: return "sup";
    case NormKind::polyhedral: return "polyhedral";
    case NormKind::matrix_operator: return "matrix_operator";
    case NormKind::symmetric_operator: return "symmetric_operator";
  }
  return "?";
}

NormSpec NormSpec::euclidean(int d) {
  if (d < 1) throw ConfigError("euclidean norm: d must be >= 1");
  NormSpec s;
  s.kind_ = NormKind::euclidean;
  s.dim_ = s.d1_ = d;
  s.d2_ = 1;
  s.radius_ = 1.0;
  return s;
}

NormSpec NormSpec::sup(int d) {
  if (d < 1) throw ConfigError("sup norm: d must be >= 1");
  NormSpec s;
  s.kind_ = NormKind::sup;
  s.dim_ = s.d1_ = d;
  s.d2_ = 1;
  s.vertices_ = Matrix::Identity(d, d);
  s.canonical_linf_ = true;
  s.radius_ = std::sqrt(static_cast<double>(d));
  return s;
}

NormSpec NormSpec::polyhedral(Matrix U) {
  if (U.rows() < 1 || U.cols() < 1) throw ConfigError("polyhedral norm: empty vertex list");
  if (!U.allFinite()) throw ConfigError("polyhedral norm: non-finite vertex entries");
  for (Eigen::Index i = 0; i < U.rows(); ++i)
    if (U.row(i).squaredNorm() == 0) throw ConfigError("polyhedral norm: zero vertex");
  Eigen::FullPivLU<Matrix> lu(U);
  lu.setThreshold(1e-12);
  if (lu.rank() < U.cols()) throw ConfigError("polyhedral norm: vertices do not span R^d");

  NormSpec s;
  s.kind_ = NormKind::polyhedral;
  s.dim_ = s.d1_ = static_cast<int>(U.cols());
  s.d2_ = 1;
  s.vertices_ = std::move(U);

  // Exactly {±e_i}: one unit entry per row, each coordinate hit once.
  if (s.vertices_.rows() == s.vertices_.cols()) {
    std::vector<int> hit(s.dim_, 0);
    bool ok = true;
    for (int i = 0; i < s.dim_ && ok; ++i) {
      int nz = 0, at = -1;
      for (int j = 0; j < s.dim_; ++j) {
        const double v = s.vertices_(i, j);
        if (v == 0) continue;
        if (std::fabs(v) != 1.0) ok = false;
        ++nz;
        at = j;
      }
      if (nz != 1) ok = false;
      if (ok) ++hit[at];
    }
    for (int h : hit) ok = ok && h == 1;
    s.canonical_linf_ = ok;
  }
  s.compute_radius();
  return s;
}

NormSpec NormSpec::matrix_operator(int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw ConfigError("matrix_operator norm: dims must be >= 1");
  NormSpec s;
  s.kind_ = NormKind::matrix_operator;
  s.d1_ = d1;
  s.d2_ = d2;
  s.dim_ = d1 * d2;
  s.radius_ = std::sqrt(static_cast<double>(std::min(d1, d2)));
  return s;
}

NormSpec NormSpec::symmetric_operator(int l) {
  NormSpec s = matrix_operator(l, l);
  s.kind_ = NormKind::symmetric_operator;
  return s;
}

void NormSpec::compute_radius() {
  if (canonical_linf_) {
    radius_ = std::sqrt(static_cast<double>(dim_));
    radius_exact_ = true;
    return;
  }
  const int N = static_cast<int>(vertices_.rows());
  const int d = dim_;
  const double combos = binomial_count(N, d) * std::ldexp(1.0, d - 1);
  double best = 0;

  auto try_subset = [&](const std::vector<int>& idx, std::uint64_t sign_mask) -> double {
    Matrix A(d, d);
    for (int r = 0; r < d; ++r) A.row(r) = vertices_.row(idx[r]);
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible()) return -1;
    Vector b(d);
    for (int r = 0; r < d; ++r) b(r) = (r == 0 || ((sign_mask >> (r - 1)) & 1u) == 0) ? 1.0 : -1.0;
    const Vector x = lu.solve(b);
    const double g = (vertices_ * x).cwiseAbs().maxCoeff();
    if (g > 1 + 1e-9) return -1;
    return x.norm();
  };

  if (combos <= 2e6) {
    std::vector<int> idx(d);
    for (int i = 0; i < d; ++i) idx[i] = i;
    for (;;) {
      Matrix A(d, d);
      for (int r = 0; r < d; ++r) A.row(r) = vertices_.row(idx[r]);
      Eigen::FullPivLU<Matrix> lu(A);
      if (lu.isInvertible()) {
        const std::uint64_t nsign = std::uint64_t{1} << (d - 1);
        for (std::uint64_t m = 0; m < nsign; ++m) {
          Vector b(d);
          for (int r = 0; r < d; ++r) b(r) = (r == 0 || ((m >> (r - 1)) & 1u) == 0) ? 1.0 : -1.0;
          const Vector x = lu.solve(b);
          if ((vertices_ * x).cwiseAbs().maxCoeff() <= 1 + 1e-9) best = std::max(best, x.norm());
        }
      }
      int k = d - 1;
      while (k >= 0 && idx[k] == N - d + k) --k;
      if (k < 0) break;
      ++idx[k];
      for (int j = k + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
    }
    radius_exact_ = true;
  } else {
    CounterRng rng(0x5eed5eedULL ^ static_cast<std::uint64_t>(N * 131 + d));
    std::vector<int> perm(N);
    for (int trial = 0; trial < 200000; ++trial) {
      for (int i = 0; i < N; ++i) perm[i] = i;
      for (int i = 0; i < d; ++i) {
        const int j = i + static_cast<int>(rng.next() % static_cast<std::uint64_t>(N - i));
        std::swap(perm[i], perm[j]);
      }
      std::vector<int> idx(perm.begin(), perm.begin() + d);
      const double r = try_subset(idx, rng.next());
      best = std::max(best, r);
    }
    radius_exact_ = false;
  }
  radius_ = best;
}

const Matrix& NormSpec::vertices() const {
  if (kind_ != NormKind::sup && kind_ != NormKind::polyhedral)
    throw DomainError("vertices: only sup and polyhedral norms have a finite dual vertex set");
  return vertices_;
}

double NormSpec::max_vertex_l2() const {
  if (kind_ == NormKind::polyhedral) return vertices_.rowwise().norm().maxCoeff();
  return 1.0;
}

double NormSpec::inradius() const {
  if (kind_ == NormKind::polyhedral) return 1.0 / max_vertex_l2();
  return 1.0;
}

double NormSpec::norm(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw DomainError("norm: dimension mismatch");
  switch (kind_) {
    case NormKind::euclidean: return std::sqrt(kernels::sum_squares(x.data(), x.size()));
    case NormKind::sup: return kernels::max_abs(x.data(), x.size());
    case NormKind::polyhedral: {
      if (canonical_linf_) return kernels::max_abs(x.data(), x.size());
      const Vector ux = vertices_ * as_vector(x);
      return kernels::max_abs(ux.data(), ux.size());
    }
    case NormKind::matrix_operator:
    case NormKind::symmetric_operator:
      return singular_values(x, d1_, d2_, kind_ == NormKind::symmetric_operator).maxCoeff();
  }
  return 0;
}

double NormSpec::dual_norm(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw DomainError("dual_norm: dimension mismatch");
  switch (kind_) {
    case NormKind::euclidean: return std::sqrt(kernels::sum_squares(x.data(), x.size()));
    case NormKind::sup: return kernels::sum_abs(x.data(), x.size());
    case NormKind::polyhedral: {
      if (canonical_linf_) return kernels::sum_abs(x.data(), x.size());
      // ‖y‖_* = min Σ|λ_i| subject to Σ λ_i u_i = y.
      const int N = static_cast<int>(vertices_.rows());
      Matrix A(dim_, 2 * N);
      A.leftCols(N) = vertices_.transpose();
      A.rightCols(N) = -vertices_.transpose();
      const LpResult r = solve_standard_lp(A, as_vector(x), Vector::Ones(2 * N));
      if (r.status != LpStatus::optimal) throw NumericError("dual_norm: LP did not reach optimality");
      return r.value;
    }
    case NormKind::matrix_operator:
    case NormKind::symmetric_operator:
      return singular_values(x, d1_, d2_, kind_ == NormKind::symmetric_operator).sum();
  }
  return 0;
}

int NormSpec::dual_argmax_index(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw DomainError("dual_argmax: dimension mismatch");
  if (kind_ == NormKind::sup) {
    const std::size_t i = kernels::argmax_abs(x.data(), x.size());
    return static_cast<int>(2 * i + (x[i] >= 0 ? 0 : 1));
  }
  if (kind_ != NormKind::polyhedral) throw DomainError("dual_argmax_index: needs sup or polyhedral norm");
  const Vector ux = vertices_ * as_vector(x);
  const std::size_t i = kernels::argmax_abs(ux.data(), ux.size());
  return static_cast<int>(2 * i + (ux(i) >= 0 ? 0 : 1));
}

Vector NormSpec::dual_argmax(std::span<const double> x) const {
  switch (kind_) {
    case NormKind::euclidean: {
      const double n = std::sqrt(kernels::sum_squares(x.data(), x.size()));
      if (n == 0) {
        Vector e = Vector::Zero(dim_);
        e(0) = 1;
        return e;
      }
      return as_vector(x) / n;
    }
    case NormKind::sup:
    case NormKind::polyhedral: {
      const int k = dual_argmax_index(x);
      Vector u = vertices_.row(k / 2).transpose();
      return (k % 2 == 0) ? u : Vector(-u);
    }
    default: throw DomainError("dual_argmax: not available for matrix norms");
  }
}

std::string NormSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  if (is_matrix())
    os << "(" << d1_ << "x" << d2_ << ")";
  else
    os << "(" << dim_ << (kind_ == NormKind::polyhedral ? ", N=" + std::to_string(vertices_.rows()) : "") << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::sub_gaussian: return "sub_gaussian";
    case ProfileKind::sub_exponential: return "sub_exponential";
    case ProfileKind::sub_gamma: return "sub_gamma";
    case ProfileKind::power: return "power";
    case ProfileKind::table: return "table";
  }
  return "?";
}

MomentProfile MomentProfile::sub_gaussian(double eta) {
  MomentProfile m;
  m.kind = ProfileKind::sub_gaussian;
  m.eta = eta;
  return m;
}

MomentProfile MomentProfile::sub_exponential(double eta) {
  MomentProfile m;
  m.kind = ProfileKind::sub_exponential;
  m.eta = eta;
  return m;
}

MomentProfile MomentProfile::sub_gamma(double eta1, double eta2) {
  MomentProfile m;
  m.kind = ProfileKind::sub_gamma;
  m.eta = eta1;
  m.eta2 = eta2;
  return m;
}

MomentProfile MomentProfile::power(double eta, double alpha) {
  MomentProfile m;
  m.kind = ProfileKind::power;
  m.eta = eta;
  m.alpha = alpha;
  return m;
}

MomentProfile MomentProfile::constant(double c) { return power(c, 0.0); }

MomentProfile MomentProfile::table(std::vector<double> p_grid, std::vector<double> h_values) {
  if (p_grid.size() < 2 || p_grid.size() != h_values.size())
    throw ConfigError("table profile: need >= 2 points and matching lengths");
  for (std::size_t i = 1; i < p_grid.size(); ++i)
    if (!(p_grid[i] > p_grid[i - 1])) throw ConfigError("table profile: p_grid must increase");
  MomentProfile m;
  m.kind = ProfileKind::table;
  m.domain_lo = std::max(1.0, p_grid.front());
  m.p_grid = std::move(p_grid);
  m.h_values = std::move(h_values);
  return m;
}

double MomentProfile::h(double p) const {
  switch (kind) {
    case ProfileKind::sub_gaussian: return eta * std::sqrt(p);
    case ProfileKind::sub_exponential: return eta * p;
    case ProfileKind::sub_gamma: return eta * std::sqrt(p) + eta2 * p;
    case ProfileKind::power: return alpha == 0 ? eta : eta * std::pow(p, alpha);
    case ProfileKind::table: {
      if (p <= p_grid.front()) return h_values.front();
      if (p > p_grid.back()) return kInf;
      const auto it = std::upper_bound(p_grid.begin(), p_grid.end(), p);
      const std::size_t j = static_cast<std::size_t>(it - p_grid.begin());
      if (j >= p_grid.size()) return h_values.back();
      const double w = (p - p_grid[j - 1]) / (p_grid[j] - p_grid[j - 1]);
      return (1 - w) * h_values[j - 1] + w * h_values[j];
    }
  }
  return kInf;
}

double MomentProfile::log_h(double p) const {
  const double v = h(p);
  return v > 0 ? std::log(v) : -kInf;
}

double MomentProfile::domain_hi() const { return kind == ProfileKind::table ? p_grid.back() : kInf; }

void MomentProfile::validate() const {
  if (!(domain_lo >= 1)) throw ConfigError("moment profile: domain_lo must be >= 1");
  if (!(eta >= 0) || !(eta2 >= 0) || !std::isfinite(eta) || !std::isfinite(eta2))
    throw ConfigError("moment profile: eta parameters must be finite and >= 0");
  if (kind == ProfileKind::power && !std::isfinite(alpha))
    throw ConfigError("moment profile: alpha must be finite");
  const double lo = domain_lo;
  const double hi = std::min(domain_hi(), 1e4);
  double prev = -kInf;
  for (int i = 0; i < 64; ++i) {
    const double p = hi > lo ? lo * std::pow(hi / lo, i / 63.0) : lo;
    const double v = h(p);
    if (!std::isfinite(v) || v < 0) throw ConfigError("moment profile: h must be finite and >= 0");
    if (v < prev * (1 - 1e-12)) throw ConfigError("moment profile: h must be non-decreasing");
    prev = v;
  }
}

std::string MomentProfile::describe() const {
  std::ostringstream os;
  os << to_string(kind) << "(eta=" << eta;
  if (kind == ProfileKind::sub_gamma) os << ", eta2=" << eta2;
  if (kind == ProfileKind::power) os << ", alpha=" << alpha;
  os << (gaussian_relative ? ", gaussian-relative" : "") << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

CovarianceSpec::CovarianceSpec(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
    throw ConfigError("covariance: matrix must be square and non-empty");
  if (!sigma.allFinite()) throw ConfigError("covariance: non-finite entries");
  if (!is_symmetric(sigma)) throw ConfigError("covariance: matrix is not symmetric");
  const int d = static_cast<int>(sigma.rows());
  sigma_ = 0.5 * (sigma + sigma.transpose());

  Matrix offdiag = sigma_;
  offdiag.diagonal().setZero();
  diagonal_ = offdiag.cwiseAbs().maxCoeff() == 0;

  if (diagonal_) {
    evals_ = sigma_.diagonal();
    evecs_ = Matrix::Identity(d, d);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_);
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
  }
  const double lmax = evals_.maxCoeff();
  const double lmin = evals_.minCoeff();
  if (lmin < -1e-10 * std::max(lmax, 1e-300))
    throw ConfigError("covariance: matrix is not positive semidefinite");
  evals_ = evals_.cwiseMax(0.0);
  if (diagonal_) sigma_.diagonal() = evals_;

  const Vector sq = evals_.cwiseSqrt();
  if (diagonal_) {
    sqrt_ = sq.asDiagonal();
  } else {
    sqrt_ = evecs_ * sq.asDiagonal() * evecs_.transpose();
    sqrt_ = 0.5 * (sqrt_ + sqrt_.transpose()).eval();
  }
  invertible_ = lmax > 0 && evals_.minCoeff() > 1e-12 * lmax;
  if (invertible_) {
    const Vector isq = sq.cwiseInverse();
    if (diagonal_) {
      inv_sqrt_ = isq.asDiagonal();
    } else {
      inv_sqrt_ = evecs_ * isq.asDiagonal() * evecs_.transpose();
      inv_sqrt_ = 0.5 * (inv_sqrt_ + inv_sqrt_.transpose()).eval();
    }
  }
  scaled_identity_ = diagonal_ && (evals_.array() == evals_(0)).all();

  stats_.trace = evals_.sum();
  stats_.operator_norm = lmax > 0 ? evals_.maxCoeff() : 0.0;
  stats_.nuclear_norm = stats_.trace;
  stats_.frobenius_norm = sigma_.norm();
  stats_.effective_rank = stats_.operator_norm > 0 ? stats_.trace / stats_.operator_norm
                                                   : std::numeric_limits<double>::quiet_NaN();
  trace_sqrt_ = sq.sum();
}

CovarianceSpec CovarianceSpec::identity(int d) {
  if (d < 1) throw ConfigError("covariance: d must be >= 1");
  return CovarianceSpec(Matrix::Identity(d, d));
}

CovarianceSpec CovarianceSpec::diagonal(const Vector& diag) {
  return CovarianceSpec(Matrix(diag.asDiagonal()));
}

const Matrix& CovarianceSpec::inv_sqrt() const {
  if (!invertible_) throw ConfigError("covariance is singular; inverse square root unavailable");
  return inv_sqrt_;
}

double CovarianceSpec::inv_op() const {
  if (!invertible_) throw ConfigError("covariance is singular; ||Sigma^-1||_op unavailable");
  return 1.0 / evals_.minCoeff();
}

double CovarianceSpec::norm_sigma(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != dim()) throw DomainError("norm_sigma: dimension mismatch");
  const auto v = as_vector(u);
  return std::sqrt(std::max(0.0, v.dot(sigma_ * v)));
}

double CovarianceSpec::box_norm(const NormSpec& norm) const {
  if (norm.is_matrix() || norm.dim() != dim()) throw DomainError("box_norm: needs a vector norm of matching dimension");
  switch (norm.kind()) {
    case NormKind::euclidean: return op();
    case NormKind::sup: return sigma_.diagonal().maxCoeff();
    case NormKind::polyhedral: {
      const Matrix& U = norm.vertices();
      return (U * sigma_).cwiseProduct(U).rowwise().sum().maxCoeff();
    }
    default: break;
  }
  throw DomainError("box_norm: unsupported norm");
}

}  // namespace tailcert
