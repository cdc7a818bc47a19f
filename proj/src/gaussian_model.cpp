#include "hitrun/gaussian_model.hpp"

#include "hitrun/errors.hpp"

#include <cmath>
#include <numbers>

namespace hitrun {

CovarianceSpec build_covariance(const Matrix &c) {
  if (c.rows() == 0 || c.cols() == 0)
    fail(ErrorCode::DimensionZero, "covariance has dimension zero");
  if (c.rows() != c.cols())
    fail(ErrorCode::DimensionMismatch, "covariance matrix is not square");
  if (!c.allFinite())
    fail(ErrorCode::NotPositiveDefinite, "covariance has non-finite entries");

  const double scale = c.cwiseAbs().maxCoeff();
  const double asymmetry = (c - c.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-10 * scale)
    fail(ErrorCode::NonSymmetric,
         "asymmetry " + std::to_string(asymmetry) + " exceeds tolerance");

  CovarianceSpec spec;
  spec.matrix_ = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(spec.matrix_);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::NumericalFailure, "covariance eigendecomposition failed");
  spec.variances_ = solver.eigenvalues();
  spec.basis_ = solver.eigenvectors();
  spec.diagonal_ = false;
  spec.finish();
  return spec;
}

CovarianceSpec build_diagonal_covariance(std::span<const double> variances) {
  if (variances.empty())
    fail(ErrorCode::DimensionZero, "covariance has dimension zero");
  const auto d = static_cast<Eigen::Index>(variances.size());
  CovarianceSpec spec;
  spec.variances_ = Eigen::Map<const Vector>(variances.data(), d);
  spec.matrix_ = spec.variances_.asDiagonal();
  spec.basis_ = Matrix::Identity(d, d);
  spec.diagonal_ = true;
  spec.finish();
  return spec;
}

void CovarianceSpec::finish() {
  for (Eigen::Index i = 0; i < variances_.size(); ++i) {
    if (!(variances_(i) > 0.0) || !std::isfinite(variances_(i)))
      fail(ErrorCode::NotPositiveDefinite,
           "covariance eigenvalue " + std::to_string(variances_(i)) +
               " is not strictly positive");
  }
  m_ = 1.0 / variances_.maxCoeff();
  M_ = 1.0 / variances_.minCoeff();
  log_det_ = variances_.array().log().sum();
}

Vector CovarianceSpec::apply_sqrt(const Vector &x) const {
  require_dim(x, dim(), "vector");
  if (diagonal_)
    return variances_.array().sqrt() * x.array();
  return basis_ *
         (variances_.array().sqrt() * (basis_.transpose() * x).array())
             .matrix();
}

Vector CovarianceSpec::apply_inv_sqrt(const Vector &x) const {
  require_dim(x, dim(), "vector");
  if (diagonal_)
    return x.array() / variances_.array().sqrt();
  return basis_ *
         ((basis_.transpose() * x).array() / variances_.array().sqrt())
             .matrix();
}

Vector CovarianceSpec::apply_inv(const Vector &x) const {
  require_dim(x, dim(), "vector");
  if (diagonal_)
    return x.array() / variances_.array();
  return basis_ *
         ((basis_.transpose() * x).array() / variances_.array()).matrix();
}

Matrix CovarianceSpec::sqrt_matrix() const {
  return basis_ * variances_.array().sqrt().matrix().asDiagonal() *
         basis_.transpose();
}

Matrix CovarianceSpec::inv_sqrt_matrix() const {
  return basis_ * variances_.array().rsqrt().matrix().asDiagonal() *
         basis_.transpose();
}

Matrix CovarianceSpec::inv_matrix() const {
  return basis_ * variances_.array().inverse().matrix().asDiagonal() *
         basis_.transpose();
}

double natural_norm(const CovarianceSpec &c, const Vector &x) {
  return c.apply_inv_sqrt(x).norm();
}

double log_density(const CovarianceSpec &c, const Vector &x) {
  const double q = c.apply_inv_sqrt(x).squaredNorm();
  const double d = static_cast<double>(c.dim());
  return -0.5 * q - 0.5 * (d * std::log(2.0 * std::numbers::pi) + c.log_det());
}

Vector sample_target(const CovarianceSpec &c, Rng &rng) {
  Vector g(c.dim());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    g(i) = rng.normal();
  return c.apply_sqrt(g);
}

} // namespace hitrun
