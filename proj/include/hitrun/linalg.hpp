#pragma once

#include <Eigen/Dense>

#include <string>

namespace hitrun {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Smallest eigenpair of a symmetric matrix. When the smallest eigenvalue is
/// degenerate (within `tie_tolerance`), `eigenspace_dim` reports the
/// multiplicity and `vector` is the unit vector in that eigenspace with the
/// largest first non-vanishing component, taken with positive sign.
struct MinEigen {
  double value = 0.0;
  Vector vector;
  int eigenspace_dim = 1;
};

MinEigen smallest_eigenpair(const Matrix &symmetric,
                            double tie_tolerance = 1e-9);

void require_dim(const Vector &v, Eigen::Index expected, const char *what);

} // namespace hitrun
