#include "hitrun/linalg.hpp"

#include "hitrun/errors.hpp"

#include <cmath>

namespace hitrun {

MinEigen smallest_eigenpair(const Matrix &symmetric, double tie_tolerance) {
  if (symmetric.rows() == 0 || symmetric.rows() != symmetric.cols())
    fail(ErrorCode::DimensionMismatch, "smallest_eigenpair needs a square matrix");

  const Matrix sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::NumericalFailure, "symmetric eigensolver did not converge");

  const Vector &values = solver.eigenvalues(); // ascending
  const Matrix &vectors = solver.eigenvectors();

  MinEigen out;
  out.value = values(0);
  int k = 1;
  while (k < values.size() && values(k) - values(0) <= tie_tolerance)
    ++k;
  out.eigenspace_dim = k;

  if (k > 1) {
    // Project successive canonical vectors onto the eigenspace; the first
    // one with a non-vanishing projection fixes the representative, and its
    // own coordinate is positive by construction.
    const Matrix basis = vectors.leftCols(k);
    for (Eigen::Index i = 0; i < sym.rows(); ++i) {
      Vector candidate = basis * basis.row(i).transpose();
      if (candidate.norm() > 1e-8) {
        out.vector = candidate.normalized();
        return out;
      }
    }
  }

  out.vector = vectors.col(0);
  for (Eigen::Index i = 0; i < out.vector.size(); ++i) {
    if (std::abs(out.vector(i)) > 1e-12) {
      if (out.vector(i) < 0)
        out.vector = -out.vector;
      break;
    }
  }
  return out;
}

void require_dim(const Vector &v, Eigen::Index expected, const char *what) {
  if (v.size() != expected)
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + " has dimension " + std::to_string(v.size()) +
             ", expected " + std::to_string(expected));
}

} // namespace hitrun
