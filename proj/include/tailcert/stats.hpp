#pragma once

#include <cstdint>

namespace tailcert {

/// P(Bin(n, q) ≤ k); 0 for k < 0 and 1 for k ≥ n.
double binomial_cdf(std::int64_t k, std::int64_t n, double q);

/// One-sided Clopper-Pearson bounds for a binomial proportion with x
/// successes in n trials: P(p < lower) ≤ alpha, P(p > upper) ≤ alpha.
double clopper_pearson_lower(std::int64_t x, std::int64_t n, double alpha);
double clopper_pearson_upper(std::int64_t x, std::int64_t n, double alpha);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace tailcert
