#pragma once

#include "hitrun/linalg.hpp"
#include "hitrun/rng.hpp"

#include <span>

namespace hitrun {

/// Symmetric positive definite covariance C of a centred Gaussian target
/// N(0, C), with its spectral decomposition cached at construction.
///
/// m, M and kappa describe the precision C^{-1}: m is its smallest
/// eigenvalue, M its largest and kappa = M / m.
///
/// Immutable after construction; safe to share between threads.
class CovarianceSpec {
public:
  Eigen::Index dim() const { return variances_.size(); }
  bool is_diagonal() const { return diagonal_; }

  const Matrix &matrix() const { return matrix_; }
  /// Eigenvalues of C, paired column-wise with eigenvectors().
  const Vector &eigenvalues() const { return variances_; }
  const Matrix &eigenvectors() const { return basis_; }

  double m() const { return m_; }
  double M() const { return M_; }
  double kappa() const { return M_ / m_; }
  double log_det() const { return log_det_; }
  double largest_variance() const { return 1.0 / m_; }

  Vector apply_sqrt(const Vector &x) const;
  Vector apply_inv_sqrt(const Vector &x) const;
  Vector apply_inv(const Vector &x) const;

  Matrix sqrt_matrix() const;
  Matrix inv_sqrt_matrix() const;
  Matrix inv_matrix() const;

  friend CovarianceSpec build_covariance(const Matrix &c);
  friend CovarianceSpec build_diagonal_covariance(std::span<const double> v);

private:
  CovarianceSpec() = default;
  void finish();

  bool diagonal_ = false;
  Matrix matrix_;
  Vector variances_;
  Matrix basis_;
  double m_ = 1.0;
  double M_ = 1.0;
  double log_det_ = 0.0;
};

/// Dense input. Asymmetry above 1e-10 times the largest entry is rejected;
/// otherwise the matrix is symmetrized before decomposition.
CovarianceSpec build_covariance(const Matrix &c);
CovarianceSpec build_diagonal_covariance(std::span<const double> variances);

/// |C^{-1/2} x|.
double natural_norm(const CovarianceSpec &c, const Vector &x);

double log_density(const CovarianceSpec &c, const Vector &x);

/// C^{1/2} g with g a vector of independent standard normals.
Vector sample_target(const CovarianceSpec &c, Rng &rng);

} // namespace hitrun
