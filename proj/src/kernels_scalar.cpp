#include "tailcert/kernels.hpp"

#include <cmath>

namespace tailcert::kernels::scalar {

double max_abs(const double* x, std::size_t n) noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
  return m;
}

// Four interleaved accumulators, matching the lane layout of the AVX2 path so
// the two agree to rounding.
double sum_squares(const double* x, std::size_t n) noexcept {
  double a[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) a[k] += x[i + k] * x[i + k];
  double s = (a[0] + a[1]) + (a[2] + a[3]);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

double sum_abs(const double* x, std::size_t n) noexcept {
  double a[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) a[k] += std::fabs(x[i + k]);
  double s = (a[0] + a[1]) + (a[2] + a[3]);
  for (; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

double dot(const double* x, const double* y, std::size_t n) noexcept {
  double a[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    for (int k = 0; k < 4; ++k) a[k] += x[i + k] * y[i + k];
  double s = (a[0] + a[1]) + (a[2] + a[3]);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

std::size_t argmax_abs(const double* x, std::size_t n) noexcept {
  std::size_t best = 0;
  double m = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(x[i]);
    if (v > m) {
      m = v;
      best = i;
    }
  }
  return best;
}

}  // namespace tailcert::kernels::scalar
