#include "tailcert/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "tailcert/certificate.hpp"
#include "tailcert/errors.hpp"

namespace tailcert {

double binomial_cdf(std::int64_t k, std::int64_t n, double q) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (q <= 0) return 1.0;
  if (q >= 1) return 0.0;
  // P(X ≤ k) = I_{1-q}(n-k, k+1).
  return boost::math::ibetac(static_cast<double>(k + 1), static_cast<double>(n - k), q);
}

double clopper_pearson_lower(std::int64_t x, std::int64_t n, double alpha) {
  if (n <= 0 || x < 0 || x > n) throw DomainError("clopper_pearson_lower: need 0 <= x <= n, n > 0");
  if (x == 0) return 0.0;
  return boost::math::ibeta_inv(static_cast<double>(x), static_cast<double>(n - x + 1), alpha);
}

double clopper_pearson_upper(std::int64_t x, std::int64_t n, double alpha) {
  if (n <= 0 || x < 0 || x > n) throw DomainError("clopper_pearson_upper: need 0 <= x <= n, n > 0");
  if (x == n) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(x + 1), static_cast<double>(n - x), 1.0 - alpha);
}

void CompensatedSum::add(double v) noexcept {
  const double t = sum_ + v;
  if (std::fabs(sum_) >= std::fabs(v))
    comp_ += (sum_ - t) + v;
  else
    comp_ += (v - t) + sum_;
  sum_ = t;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::lemma1_generic: return "lemma1_generic";
    case Method::theorem2: return "theorem2";
    case Method::corollary_subgauss: return "corollary_subgauss";
    case Method::corollary_subexp: return "corollary_subexp";
    case Method::polyhedral: return "polyhedral";
    case Method::linf_gaussian: return "linf_gaussian";
    case Method::pushforward: return "pushforward";
    case Method::psd_sum: return "psd_sum";
    case Method::sample_cov: return "sample_cov";
    case Method::matrix_series: return "matrix_series";
    case Method::coupling: return "coupling";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  static const Method all[] = {Method::lemma1_generic,     Method::theorem2,
                               Method::corollary_subgauss, Method::corollary_subexp,
                               Method::polyhedral,         Method::linf_gaussian,
                               Method::pushforward,        Method::psd_sum,
                               Method::sample_cov,         Method::matrix_series,
                               Method::coupling};
  for (Method m : all)
    if (to_string(m) == s) return m;
  throw ConfigError("unknown method '" + s + "'");
}

}  // namespace tailcert
