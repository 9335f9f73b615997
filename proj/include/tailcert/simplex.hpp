#pragma once

#include "tailcert/core_math.hpp"

namespace tailcert {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status;
  Vector x;
  double value;
  int pivots;
};

/// min cᵀx subject to Ax = b, x ≥ 0. Dense two-phase tableau simplex with
/// Bland's anti-cycling rule; intended for the small problems that arise from
/// polyhedral norms (tens of variables).
LpResult solve_standard_lp(const Matrix& A, const Vector& b, const Vector& c);

}  // namespace tailcert
