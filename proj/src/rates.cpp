#include "hitrun/rates.hpp"

#include "hitrun/errors.hpp"
#include "hitrun/linalg.hpp"
#include "hitrun/quadrature.hpp"
#include "hitrun/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hitrun {

namespace {

void check_kappa(double kappa) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa))
    fail(ErrorCode::BadKappa, "kappa must be finite and >= 1");
}

} // namespace

RateReport rate_from_second_moment(const Matrix &m, std::string method,
                                   const std::vector<Matrix> &batches) {
  const MinEigen e = smallest_eigenpair(m);
  RateReport r;
  r.rho = 0.5 * e.value;
  r.method = std::move(method);
  r.minimizer = e.vector;
  r.eigenspace_dim = e.eigenspace_dim;
  r.second_moment = 0.5 * (m + m.transpose());
  r.dim = static_cast<int>(m.rows());

  // lambda_min <= trace / d = 1 / d.
  const double cap = 0.5 * m.trace() / static_cast<double>(m.rows());
  if (r.rho > cap + 1e-9 || !std::isfinite(r.rho))
    fail(ErrorCode::NumericalFailure,
         "rate " + std::to_string(r.rho) + " exceeds trace bound");

  if (batches.size() >= 2) {
    std::vector<double> rhos;
    for (const Matrix &b : batches)
      rhos.push_back(0.5 * smallest_eigenpair(b).value);
    double mean = 0.0;
    for (double x : rhos)
      mean += x;
    mean /= static_cast<double>(rhos.size());
    double ss = 0.0;
    for (double x : rhos)
      ss += (x - mean) * (x - mean);
    const double n = static_cast<double>(rhos.size());
    r.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

std::string rate_method(const Estimator &estimator) {
  if (std::holds_alternative<ExactDiscrete>(estimator))
    return "eigen-exact";
  if (std::holds_alternative<MonteCarlo>(estimator))
    return "eigen-mc";
  return "quadrature";
}

RateReport rho_general(const DirectionLaw &law, const CovarianceSpec &c,
                       const Estimator &estimator) {
  const SecondMoment m = second_moment(law, c, estimator);
  RateReport r = rate_from_second_moment(m.matrix, rate_method(estimator),
                                         m.batches);
  r.kappa = c.kappa();
  r.label = "general";
  return r;
}

double rho_bivariate(double kappa) {
  check_kappa(kappa);
  return 0.5 / (std::sqrt(kappa) + 1.0);
}

double rho_3d_one_low(double kappa) {
  check_kappa(kappa);
  // sin/(kappa tan^2 + 1) rewritten without the pole of tan at pi/2.
  auto f = [kappa](double a) {
    const double s = std::sin(a);
    const double c = std::cos(a);
    return s * c * c / (kappa * s * s + c * c);
  };
  const auto r =
      quad::integrate(f, 0.0, 0.5 * std::numbers::pi, 1e-13, 0.0, 4000, 16);
  if (!r.converged && r.error > 1e-10)
    fail(ErrorCode::NumericalFailure, "one-low-mode quadrature did not converge");
  return 0.5 * r.value;
}

RateReport rho_3d_one_high(double kappa) {
  check_kappa(kappa);
  const CovarianceSpec c = case_covariance(RateCase::three_d_high, kappa);
  RateReport r = rho_general(DirectionLaw::uniform(3), c, SphereQuadrature{});
  if (kappa > 1.0 && std::abs(r.minimizer(2)) >= 1e-6)
    fail(ErrorCode::NumericalFailure, "minimizer left the equatorial plane");
  r.label = "3d-high";
  return r;
}

double rho_4d_one_low(double kappa) {
  check_kappa(kappa);
  const double s = 1.0 + 1.0 / std::sqrt(kappa);
  return 1.0 / (kappa * 2.0 * s * s);
}

double rho_two_scale_approx(int d1, int d2, double kappa) {
  if (d1 < 0 || d2 < 0 || d1 + d2 < 1)
    fail(ErrorCode::BadDimensions, "need d1, d2 >= 0 and d1 + d2 >= 1");
  check_kappa(kappa);
  return 0.5 / (static_cast<double>(d1) + kappa * static_cast<double>(d2));
}

RateCase parse_rate_case(const std::string &name) {
  if (name == "bivariate")
    return RateCase::bivariate;
  if (name == "3d-low")
    return RateCase::three_d_low;
  if (name == "3d-high")
    return RateCase::three_d_high;
  if (name == "4d-low")
    return RateCase::four_d_low;
  if (name == "two-scale")
    return RateCase::two_scale;
  fail(ErrorCode::ConfigInvalid, "unknown rate case '" + name + "'");
}

std::string to_string(RateCase rate_case) {
  switch (rate_case) {
  case RateCase::bivariate:
    return "bivariate";
  case RateCase::three_d_low:
    return "3d-low";
  case RateCase::three_d_high:
    return "3d-high";
  case RateCase::four_d_low:
    return "4d-low";
  case RateCase::two_scale:
    return "two-scale";
  }
  return "unknown";
}

CovarianceSpec case_covariance(RateCase rate_case, double kappa, int d1,
                               int d2) {
  check_kappa(kappa);
  std::vector<double> v;
  switch (rate_case) {
  case RateCase::bivariate:
    v = {kappa, 1.0};
    break;
  case RateCase::three_d_low:
    v = {kappa, 1.0, 1.0};
    break;
  case RateCase::three_d_high:
    v = {kappa, kappa, 1.0};
    break;
  case RateCase::four_d_low:
    v = {kappa, 1.0, 1.0, 1.0};
    break;
  case RateCase::two_scale:
    if (d1 < 0 || d2 < 0 || d1 + d2 < 1)
      fail(ErrorCode::BadDimensions, "need d1, d2 >= 0 and d1 + d2 >= 1");
    v.assign(static_cast<std::size_t>(d1), kappa);
    v.insert(v.end(), static_cast<std::size_t>(d2), 1.0);
    break;
  }
  return build_diagonal_covariance(v);
}

double rho_case_formula(RateCase rate_case, double kappa, int d1, int d2) {
  switch (rate_case) {
  case RateCase::bivariate:
    return rho_bivariate(kappa);
  case RateCase::three_d_low:
    return rho_3d_one_low(kappa);
  case RateCase::three_d_high:
    return rho_3d_one_high(kappa).rho;
  case RateCase::four_d_low:
    return rho_4d_one_low(kappa);
  case RateCase::two_scale:
    return rho_two_scale_approx(d1, d2, kappa);
  }
  return 0.0;
}

Matrix averaged_linear_action(const DirectionLaw &law, const CovarianceSpec &c,
                              const Estimator &estimator) {
  const Matrix m = second_moment_matrix(law, c, estimator);
  return Matrix::Identity(m.rows(), m.cols()) - m;
}

Table1 table1(const std::vector<double> &kappas) {
  if (kappas.size() < 2)
    fail(ErrorCode::BadInputs, "table1 needs at least two kappa values");
  const RateCase cases[] = {RateCase::bivariate, RateCase::three_d_low,
                            RateCase::three_d_high, RateCase::four_d_low};
  for (double kappa : kappas)
    if (!(kappa > 1.0) || !std::isfinite(kappa))
      fail(ErrorCode::BadKappa, "table1 needs kappa > 1");
  Table1 t;
  for (RateCase rc : cases) {
    std::vector<double> lk, lr;
    for (double kappa : kappas) {
      const CovarianceSpec c = case_covariance(rc, kappa);
      const int d = static_cast<int>(c.dim());
      const Estimator est =
          d <= 3 ? Estimator{SphereQuadrature{}} : Estimator{RadialIntegral{}};
      const RateReport r = rho_general(DirectionLaw::uniform(d), c, est);
      Table1Row row;
      row.kappa = kappa;
      row.rate_case = rc;
      row.rho = r.rho;
      row.rho_formula = rho_case_formula(rc, kappa);
      row.method = r.method;
      t.rows.push_back(row);
      lk.push_back(std::log(kappa));
      lr.push_back(std::log(r.rho));
      if (rc == RateCase::three_d_low)
        t.compensated.push_back(r.rho * kappa / std::log(kappa));
    }
    const LineFit fit = fit_line(lk, lr);
    t.slopes.push_back({rc, fit.slope, fit.slope_se});
  }
  const auto [lo, hi] =
      std::minmax_element(t.compensated.begin(), t.compensated.end());
  t.compensated_spread = (*hi - *lo) / *lo;
  return t;
}

} // namespace hitrun
