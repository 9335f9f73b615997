#pragma once

#include <cstddef>
#include <string_view>

namespace tailcert::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best instruction set supported by this CPU and build.
Isa detected_isa() noexcept;

/// Instruction set used by the dispatching entry points below. Defaults to
/// detected_isa() unless TAILCERT_ISA=scalar is set in the environment.
Isa active_isa() noexcept;

/// Force a specific instruction set (tests). Requests for an unsupported
/// set fall back to scalar.
void set_active_isa(Isa isa) noexcept;

// Reference implementations.
namespace scalar {
double max_abs(const double* x, std::size_t n) noexcept;
double sum_squares(const double* x, std::size_t n) noexcept;
double sum_abs(const double* x, std::size_t n) noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;
std::size_t argmax_abs(const double* x, std::size_t n) noexcept;
}  // namespace scalar

namespace avx2 {
double max_abs(const double* x, std::size_t n) noexcept;
double sum_squares(const double* x, std::size_t n) noexcept;
double sum_abs(const double* x, std::size_t n) noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;
std::size_t argmax_abs(const double* x, std::size_t n) noexcept;
}  // namespace avx2

// Dispatching entry points.
double max_abs(const double* x, std::size_t n) noexcept;
double sum_squares(const double* x, std::size_t n) noexcept;
double sum_abs(const double* x, std::size_t n) noexcept;
double dot(const double* x, const double* y, std::size_t n) noexcept;

/// Index of the entry with largest magnitude; ties go to the lowest index.
std::size_t argmax_abs(const double* x, std::size_t n) noexcept;

}  // namespace tailcert::kernels
