#pragma once

#include "hitrun/directions.hpp"
#include "hitrun/gaussian_model.hpp"

#include <string>
#include <vector>

namespace hitrun {

/// Contraction rate rho = lambda_min(M) / 2 with its minimizing direction.
struct RateReport {
  double rho = 0.0;
  /// closed-form, quadrature, eigen-exact or eigen-mc.
  std::string method;
  Vector minimizer;
  int eigenspace_dim = 1;
  double std_error = 0.0;
  Matrix second_moment;
  double kappa = 1.0;
  int dim = 0;
  std::string label;
};

/// Rate from a second-moment matrix. Batch matrices, when given, yield the
/// standard error of rho from the spread of per-batch estimates.
RateReport rate_from_second_moment(const Matrix &m, std::string method,
                                   const std::vector<Matrix> &batches = {});

std::string rate_method(const Estimator &estimator);

RateReport rho_general(const DirectionLaw &law, const CovarianceSpec &c,
                       const Estimator &estimator);

/// C = diag(kappa, 1): (sqrt(kappa) + 1)^{-1} / 2.
double rho_bivariate(double kappa);
/// C = diag(kappa, 1, 1):
///   (1/2) int_0^{pi/2} sin(a) / (kappa tan(a)^2 + 1) da.
double rho_3d_one_low(double kappa);
/// C = diag(kappa, kappa, 1), by sphere quadrature. Fails if the minimizer
/// leaves the e1-e2 plane.
RateReport rho_3d_one_high(double kappa);
/// C = diag(kappa, 1, 1, 1): kappa^{-1} / (2 (1 + kappa^{-1/2})^2).
double rho_4d_one_low(double kappa);
/// C = diag(kappa 1_{d1}, 1_{d2}): (d1 + kappa d2)^{-1} / 2. A large-d
/// approximation, not a bound.
double rho_two_scale_approx(int d1, int d2, double kappa);

enum class RateCase { bivariate, three_d_low, three_d_high, four_d_low, two_scale };

RateCase parse_rate_case(const std::string &name);
std::string to_string(RateCase rate_case);

/// The diagonal covariance each case is stated for.
CovarianceSpec case_covariance(RateCase rate_case, double kappa, int d1 = 0,
                               int d2 = 0);

/// The case's own formula (closed form, 1-D quadrature, or the 3-D sphere
/// quadrature for the one-high-mode case).
double rho_case_formula(RateCase rate_case, double kappa, int d1 = 0,
                        int d2 = 0);

/// Matrix of the kernel's action on linear functions x -> zeta.C^{-1/2}x,
/// namely I - M.
Matrix averaged_linear_action(const DirectionLaw &law, const CovarianceSpec &c,
                              const Estimator &estimator);

struct Table1Row {
  double kappa = 0.0;
  RateCase rate_case = RateCase::bivariate;
  double rho = 0.0;         // lambda_min route
  double rho_formula = 0.0; // the case's own formula
  std::string method;
};

struct Table1Slope {
  RateCase rate_case = RateCase::bivariate;
  double slope = 0.0;
  double slope_se = 0.0;
};

struct Table1 {
  std::vector<Table1Row> rows;
  std::vector<Table1Slope> slopes;
  /// rho kappa / log kappa for the one-low-mode 3-D case, per kappa.
  std::vector<double> compensated;
  /// (max - min) / min of `compensated`.
  double compensated_spread = 0.0;
};

/// Sweeps kappa over the bivariate, 3-D one-low, 3-D one-high and 4-D
/// one-low cases. Rates come from lambda_min with sphere quadrature in
/// d = 2, 3 and the radial integral in d = 4; log-log slopes are fitted per
/// case.
Table1 table1(const std::vector<double> &kappas);

} // namespace hitrun
