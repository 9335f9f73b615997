#include "tailcert/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace tailcert::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  const char* env = std::getenv("TAILCERT_ISA");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return detected_isa();
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() noexcept {
  static const Isa isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  return isa;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) noexcept {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

double max_abs(const double* x, std::size_t n) noexcept {
  return active_isa() == Isa::avx2 ? avx2::max_abs(x, n) : scalar::max_abs(x, n);
}

double sum_squares(const double* x, std::size_t n) noexcept {
  return active_isa() == Isa::avx2 ? avx2::sum_squares(x, n) : scalar::sum_squares(x, n);
}

double sum_abs(const double* x, std::size_t n) noexcept {
  return active_isa() == Isa::avx2 ? avx2::sum_abs(x, n) : scalar::sum_abs(x, n);
}

double dot(const double* x, const double* y, std::size_t n) noexcept {
  return active_isa() == Isa::avx2 ? avx2::dot(x, y, n) : scalar::dot(x, y, n);
}

std::size_t argmax_abs(const double* x, std::size_t n) noexcept {
  return active_isa() == Isa::avx2 ? avx2::argmax_abs(x, n) : scalar::argmax_abs(x, n);
}

}  // namespace tailcert::kernels
