#include "tailcert/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "tailcert/errors.hpp"

namespace tailcert {

namespace {

constexpr double kEps = 1e-11;

struct Tableau {
  // Rows 0..m-1 are constraints, row m is the objective (reduced costs).
  // Column `rhs` holds the right-hand side.
  Matrix T;
  std::vector<int> basis;
  int rhs;
  int pivots = 0;

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i < T.rows(); ++i)
      if (i != r && T(i, c) != 0) T.row(i) -= T(i, c) * T.row(r);
    basis[r] = c;
    ++pivots;
  }

  // Runs Bland's rule over columns [0, ncols). Returns false if unbounded.
  bool optimize(int ncols) {
    const int m = static_cast<int>(basis.size());
    for (int guard = 0; guard < 100000; ++guard) {
      int enter = -1;
      for (int j = 0; j < ncols; ++j)
        if (T(m, j) < -kEps) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T(i, enter) > kEps) {
          const double ratio = T(i, rhs) / T(i, enter);
          if (leave < 0 || ratio < best - kEps ||
              (std::fabs(ratio - best) <= kEps && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw NumericError("simplex: iteration guard exceeded");
  }
};

}  // namespace

LpResult solve_standard_lp(const Matrix& A, const Vector& b, const Vector& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) throw DomainError("simplex: dimension mismatch");

  Tableau tb;
  tb.rhs = n + m;
  tb.T = Matrix::Zero(m + 1, n + m + 1);
  tb.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    const double s = b(i) < 0 ? -1.0 : 1.0;
    tb.T.row(i).head(n) = s * A.row(i);
    tb.T(i, n + i) = 1.0;
    tb.T(i, tb.rhs) = s * b(i);
    tb.basis[i] = n + i;
  }
  // Phase 1: minimize the sum of artificials.
  for (int i = 0; i < m; ++i) {
    tb.T.row(m).head(n) -= tb.T.row(i).head(n);
    tb.T(m, tb.rhs) -= tb.T(i, tb.rhs);
  }
  tb.optimize(n + m);
  const double scale = 1.0 + b.cwiseAbs().sum();
  if (-tb.T(m, tb.rhs) > 1e-9 * scale) return {LpStatus::infeasible, Vector::Zero(n), 0.0, tb.pivots};

  // Drive remaining artificials out of the basis; rows where that is
  // impossible are redundant and stay inert (their rhs is zero).
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) continue;
    for (int j = 0; j < n; ++j)
      if (std::fabs(tb.T(i, j)) > 1e-9) {
        tb.pivot(i, j);
        break;
      }
  }

  // Phase 2 objective row; artificial columns are never allowed to enter.
  tb.T.row(m).setZero();
  tb.T.row(m).head(n) = c.transpose();
  for (int i = 0; i < m; ++i) {
    const int bi = tb.basis[i];
    if (bi < n && c(bi) != 0) tb.T.row(m) -= c(bi) * tb.T.row(i);
  }
  if (!tb.optimize(n)) return {LpStatus::unbounded, Vector::Zero(n), -std::numeric_limits<double>::infinity(), tb.pivots};

  Vector x = Vector::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < n) x(tb.basis[i]) = tb.T(i, tb.rhs);
  return {LpStatus::optimal, x, c.dot(x), tb.pivots};
}

}  // namespace tailcert
