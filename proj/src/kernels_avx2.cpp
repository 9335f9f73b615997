#include "tailcert/kernels.hpp"

#include <cmath>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace tailcert::kernels::avx2 {

#if defined(__AVX2__)

namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

// Pairwise lane reduction in the same order as the scalar reference:
// (a0 + a1) + (a2 + a3).
inline double hsum(__m256d v) {
  alignas(32) double a[4];
  _mm256_store_pd(a, v);
  return (a[0] + a[1]) + (a[2] + a[3]);
}

}  // namespace

double max_abs(const double* x, std::size_t n) noexcept {
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, abs_pd(_mm256_loadu_pd(x + i)));
  alignas(32) double a[4];
  _mm256_store_pd(a, m);
  double r = std::fmax(std::fmax(a[0], a[1]), std::fmax(a[2], a[3]));
  for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
  return r;
}

double sum_squares(const double* x, std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

double sum_abs(const double* x, std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, abs_pd(_mm256_loadu_pd(x + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

double dot(const double* x, const double* y, std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

std::size_t argmax_abs(const double* x, std::size_t n) noexcept {
  if (n == 0) return 0;
  const double m = max_abs(x, n);
  const __m256d target = _mm256_set1_pd(m);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d eq = _mm256_cmp_pd(abs_pd(_mm256_loadu_pd(x + i)), target, _CMP_EQ_OQ);
    const int mask = _mm256_movemask_pd(eq);
    if (mask) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i)
    if (std::fabs(x[i]) == m) return i;
  return 0;
}

#else

double max_abs(const double* x, std::size_t n) noexcept { return scalar::max_abs(x, n); }
double sum_squares(const double* x, std::size_t n) noexcept { return scalar::sum_squares(x, n); }
double sum_abs(const double* x, std::size_t n) noexcept { return scalar::sum_abs(x, n); }
double dot(const double* x, const double* y, std::size_t n) noexcept {
  return scalar::dot(x, y, n);
}
std::size_t argmax_abs(const double* x, std::size_t n) noexcept {
  return scalar::argmax_abs(x, n);
}

#endif

}  // namespace tailcert::kernels::avx2
