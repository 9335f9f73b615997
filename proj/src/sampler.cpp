#include <cmath>

#include "tailcert/errors.hpp"
#include "tailcert/kernels.hpp"
#include "tailcert/models.hpp"

namespace tailcert {

std::string to_string(SamplerFamily f) {
  switch (f) {
    case SamplerFamily::gaussian_vector: return "gaussian_vector";
    case SamplerFamily::product_subexp_vector: return "product_subexp_vector";
    case SamplerFamily::rademacher_vector: return "rademacher_vector";
    case SamplerFamily::psd_rank_one: return "psd_rank_one";
    case SamplerFamily::empirical_cov: return "empirical_cov";
    case SamplerFamily::matrix_series: return "matrix_series";
  }
  return "?";
}

std::string to_string(CoreDist c) {
  switch (c) {
    case CoreDist::gaussian: return "gaussian";
    case CoreDist::laplace: return "laplace";
    case CoreDist::rademacher: return "rademacher";
  }
  return "?";
}

SamplerSpec SamplerSpec::gaussian(std::shared_ptr<const CovarianceSpec> cov, std::uint64_t seed) {
  SamplerSpec s;
  s.family = SamplerFamily::gaussian_vector;
  s.cov = std::move(cov);
  s.seed = seed;
  s.declared_profile = MomentProfile::sub_gaussian(1.0);
  return s;
}

SamplerSpec SamplerSpec::subexp(std::shared_ptr<const CovarianceSpec> cov, std::uint64_t seed) {
  SamplerSpec s;
  s.family = SamplerFamily::product_subexp_vector;
  s.cov = std::move(cov);
  s.core = CoreDist::laplace;
  s.seed = seed;
  s.declared_profile = MomentProfile::sub_exponential(2.0);
  return s;
}

SamplerSpec SamplerSpec::rademacher(int d, std::uint64_t seed) {
  SamplerSpec s;
  s.family = SamplerFamily::rademacher_vector;
  s.cov = std::make_shared<CovarianceSpec>(CovarianceSpec::identity(d));
  s.core = CoreDist::rademacher;
  s.seed = seed;
  s.declared_profile = MomentProfile::sub_gaussian(1.0);
  return s;
}

SamplerSpec SamplerSpec::rank_one(std::shared_ptr<const CovarianceSpec> cov, CoreDist core,
                                  std::uint64_t seed) {
  SamplerSpec s;
  s.family = SamplerFamily::psd_rank_one;
  s.cov = std::move(cov);
  s.core = core;
  s.seed = seed;
  s.declared_profile = MomentProfile::sub_exponential(2.0);
  return s;
}

SamplerSpec SamplerSpec::empirical(std::shared_ptr<const CovarianceSpec> cov, int n, CoreDist core,
                                   std::uint64_t seed) {
  SamplerSpec s = rank_one(std::move(cov), core, seed);
  s.family = SamplerFamily::empirical_cov;
  s.n = n;
  return s;
}

SamplerSpec SamplerSpec::series(std::vector<Matrix> A_list, CoreDist coefficients,
                                std::uint64_t seed) {
  SamplerSpec s;
  s.family = SamplerFamily::matrix_series;
  s.A_list = std::move(A_list);
  s.core = coefficients;
  s.seed = seed;
  if (coefficients == CoreDist::laplace) {
    s.declared_profile = MomentProfile::power(M_SQRT1_2, 1.0);
    s.declared_profile.domain_lo = 2.0;
  } else {
    s.declared_profile = MomentProfile::constant(1.0);
  }
  s.declared_profile.gaussian_relative = true;
  return s;
}

bool SamplerSpec::is_matrix() const noexcept {
  return family == SamplerFamily::psd_rank_one || family == SamplerFamily::empirical_cov ||
         family == SamplerFamily::matrix_series;
}

int SamplerSpec::out_rows() const {
  if (family == SamplerFamily::matrix_series)
    return A_list.empty() ? 0 : static_cast<int>(A_list.front().rows());
  return cov ? cov->dim() : 0;
}

int SamplerSpec::out_cols() const {
  if (family == SamplerFamily::matrix_series)
    return A_list.empty() ? 0 : static_cast<int>(A_list.front().cols());
  if (is_matrix()) return cov ? cov->dim() : 0;
  return 1;
}

const CovarianceSpec& SamplerSpec::covariance() const {
  if (!cov) throw ConfigError("sampler: family has no covariance");
  return *cov;
}

void SamplerSpec::validate() const {
  if (family == SamplerFamily::matrix_series) {
    if (A_list.empty()) throw ConfigError("matrix_series sampler: empty A_list");
    for (const auto& A : A_list)
      if (A.rows() != A_list.front().rows() || A.cols() != A_list.front().cols())
        throw DomainError("matrix_series sampler: A_i shapes differ");
    return;
  }
  if (!cov) throw ConfigError("sampler " + to_string(family) + ": covariance required");
  if (family == SamplerFamily::empirical_cov && n < 1) throw ConfigError("empirical_cov sampler: n must be >= 1");
  if (family == SamplerFamily::psd_rank_one || family == SamplerFamily::empirical_cov) {
    if (core == CoreDist::rademacher) throw ConfigError("psd samplers use gaussian or laplace cores");
  }
}

Sampler::Sampler(const SamplerSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {
  spec_.validate();
  out_dim_ = spec_.out_dim();
  if (spec_.family == SamplerFamily::matrix_series) return;
  const CovarianceSpec& c = *spec_.cov;
  d_ = c.dim();
  z_.resize(d_);
  identity_map_ = c.is_scaled_identity() && c.eigenvalues()(0) == 1.0;
  diagonal_map_ = c.is_diagonal();
  if (diagonal_map_) {
    diag_sqrt_.resize(d_);
    for (int i = 0; i < d_; ++i) diag_sqrt_[i] = c.sqrt()(i, i);
  } else {
    sqrt_rows_.resize(static_cast<std::size_t>(d_) * d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) sqrt_rows_[static_cast<std::size_t>(i) * d_ + j] = c.sqrt()(i, j);
  }
  if (spec_.family == SamplerFamily::empirical_cov) {
    Y_.resize(spec_.n, d_);
    S_.resize(d_, d_);
  }
}

double Sampler::core_draw(CoreDist c) {
  switch (c) {
    case CoreDist::gaussian: return rng_.normal();
    case CoreDist::laplace: return rng_.laplace();
    case CoreDist::rademacher: return rng_.rademacher();
  }
  return 0;
}

void Sampler::linear_map(std::span<const double> z, std::span<double> out) const {
  if (identity_map_) {
    for (int i = 0; i < d_; ++i) out[i] = z[i];
  } else if (diagonal_map_) {
    for (int i = 0; i < d_; ++i) out[i] = diag_sqrt_[i] * z[i];
  } else {
    for (int i = 0; i < d_; ++i)
      out[i] = kernels::dot(sqrt_rows_.data() + static_cast<std::size_t>(i) * d_, z.data(), d_);
  }
}

void Sampler::draw(std::span<double> out) {
  if (static_cast<int>(out.size()) != out_dim_) throw DomainError("sampler: output size mismatch");
  switch (spec_.family) {
    case SamplerFamily::gaussian_vector:
    case SamplerFamily::product_subexp_vector:
    case SamplerFamily::rademacher_vector: {
      const CoreDist c = spec_.family == SamplerFamily::gaussian_vector ? CoreDist::gaussian
                         : spec_.family == SamplerFamily::rademacher_vector ? CoreDist::rademacher
                                                                            : CoreDist::laplace;
      for (int i = 0; i < d_; ++i) z_[i] = core_draw(c);
      linear_map(z_, out);
      return;
    }
    case SamplerFamily::psd_rank_one: {
      std::vector<double> y(d_);
      for (int i = 0; i < d_; ++i) z_[i] = core_draw(spec_.core);
      linear_map(z_, y);
      for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) out[static_cast<std::size_t>(i) * d_ + j] = y[i] * y[j];
      return;
    }
    case SamplerFamily::empirical_cov: {
      std::vector<double> y(d_);
      for (int r = 0; r < spec_.n; ++r) {
        for (int i = 0; i < d_; ++i) z_[i] = core_draw(spec_.core);
        linear_map(z_, y);
        for (int i = 0; i < d_; ++i) Y_(r, i) = y[i];
      }
      S_.noalias() = Y_.transpose() * Y_;
      S_ /= static_cast<double>(spec_.n);
      S_ -= spec_.cov->sigma();
      for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) out[static_cast<std::size_t>(i) * d_ + j] = S_(i, j);
      return;
    }
    case SamplerFamily::matrix_series: {
      const Matrix& A0 = spec_.A_list.front();
      const int r = static_cast<int>(A0.rows()), c = static_cast<int>(A0.cols());
      std::fill(out.begin(), out.end(), 0.0);
      for (const Matrix& A : spec_.A_list) {
        const double xi = core_draw(spec_.core);
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) out[static_cast<std::size_t>(i) * c + j] += xi * A(i, j);
      }
      return;
    }
  }
}

Matrix Sampler::batch(int n) {
  if (n < 1) throw DomainError("sampler: batch size must be >= 1");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(n, out_dim_);
  for (int i = 0; i < n; ++i) draw(std::span<double>(out.row(i).data(), out_dim_));
  return out;
}

std::optional<double> analytic_marginal_moment(const SamplerSpec& spec, std::span<const double> u,
                                               double p) {
  if (spec.is_matrix() || !spec.cov || static_cast<int>(u.size()) != spec.cov->dim()) return std::nullopt;
  switch (spec.family) {
    case SamplerFamily::gaussian_vector: {
      const double s = spec.cov->norm_sigma(u);
      if (s == 0) return 0.0;
      return std::exp(p * std::log(s) + log_gaussian_abs_moment(p));
    }
    case SamplerFamily::product_subexp_vector: {
      if (u.size() != 1) return std::nullopt;
      const double a = std::fabs(u[0]) * std::sqrt(spec.cov->sigma()(0, 0));
      if (a == 0) return 0.0;
      return std::exp(p * std::log(a) + std::lgamma(p + 1) - 0.5 * p * M_LN2);
    }
    case SamplerFamily::rademacher_vector: {
      if (u.size() != 1) return std::nullopt;
      return std::pow(std::fabs(u[0]), p);
    }
    default: return std::nullopt;
  }
}

}  // namespace tailcert
