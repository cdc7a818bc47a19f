#include <catch2/catch_amalgamated.hpp>

#include "hitrun/errors.hpp"
#include "hitrun/hit_and_run.hpp"
#include "hitrun/rates.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace hitrun;
using Catch::Approx;

namespace {

CovarianceSpec diag(std::vector<double> v) {
  return build_diagonal_covariance(v);
}

template <class Fn> ErrorCode code_of(Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an hitrun::Error");
  return ErrorCode::NumericalFailure;
}

// With t = cos(alpha) the one-low-mode integral becomes
//   1/2 int_0^1 t^2 / (k - (k - 1) t^2) dt
//   = (atanh(b) / b^3 - 1 / b^2) / (2 k),  b^2 = (k - 1) / k.
double one_low_closed(double k) {
  if (k == 1.0)
    return 1.0 / 6.0;
  const double b = std::sqrt((k - 1) / k);
  return (std::atanh(b) / (b * b * b) - 1 / (b * b)) / (2 * k);
}

// C = diag(k, k, 1): M33 = int_0^1 k t^2 / (1 + (k - 1) t^2) dt
// = k / c^2 (1 - atan(c) / c) with c^2 = k - 1, and M11 = M22 = (1 - M33) / 2.
double one_high_closed(double k) {
  if (k == 1.0)
    return 1.0 / 6.0;
  const double c = std::sqrt(k - 1);
  const double m33 = k / (c * c) * (1 - std::atan(c) / c);
  return 0.5 * std::min(m33, (1 - m33) / 2);
}

Matrix random_rotation(int d, Rng &rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      g(i, j) = rng.normal();
  return Eigen::HouseholderQR<Matrix>(g).householderQ();
}

} // namespace

TEST_CASE("isotropic rates", "[rates]") {
  for (int d : {2, 3}) {
    const RateReport r =
        rho_general(DirectionLaw::uniform(d),
                    build_covariance(Matrix::Identity(d, d)), SphereQuadrature{});
    REQUIRE(r.rho == Approx(0.5 / d).epsilon(1e-12));
    REQUIRE(r.eigenspace_dim == d);
    REQUIRE((r.minimizer - Vector::Unit(d, 0)).norm() < 1e-12);
  }
  for (int d : {4, 6}) {
    const RateReport r =
        rho_general(DirectionLaw::uniform(d),
                    build_covariance(Matrix::Identity(d, d)), RadialIntegral{});
    REQUIRE(r.rho == Approx(0.5 / d).epsilon(1e-12));
  }
}

TEST_CASE("bivariate rate", "[rates]") {
  const RateReport r =
      rho_general(DirectionLaw::uniform(2), diag({4, 1}), SphereQuadrature{});
  REQUIRE(std::abs(r.rho - 1.0 / 6.0) < 1e-8);
  REQUIRE(r.eigenspace_dim == 1);
  REQUIRE(std::abs(std::abs(r.minimizer(0)) - 1) < 1e-12);
  REQUIRE(r.minimizer(0) > 0);
  REQUIRE(r.method == "quadrature");

  REQUIRE(rho_bivariate(1) == Approx(0.25));
  REQUIRE(rho_bivariate(4) == Approx(1.0 / 6.0));
  REQUIRE(rho_bivariate(100) == Approx(1.0 / 22.0));
  for (double k : {1.0, 2.0, 4.0, 10.0, 100.0, 1e4}) {
    const double q =
        rho_general(DirectionLaw::uniform(2), diag({k, 1}), SphereQuadrature{})
            .rho;
    REQUIRE(std::abs(q - rho_bivariate(k)) < 1e-8);
  }
  REQUIRE(code_of([] { rho_bivariate(0.5); }) == ErrorCode::BadKappa);
}

TEST_CASE("axes law rate is one quarter in the natural metric", "[rates]") {
  for (double k : {1.0, 9.0, 1e6}) {
    const RateReport r =
        rho_general(DirectionLaw::axes(2), diag({k, 1}), ExactDiscrete{});
    REQUIRE(r.rho == Approx(0.25).epsilon(1e-15));
    REQUIRE(r.eigenspace_dim == 2);
    REQUIRE(r.method == "eigen-exact");
  }
}

TEST_CASE("one low mode in three dimensions", "[rates]") {
  REQUIRE(rho_3d_one_low(1) == Approx(1.0 / 6.0).epsilon(1e-12));
  for (double k : {1.5, 4.0, 100.0, 1e4, 1e5, 1e7}) {
    REQUIRE(rho_3d_one_low(k) == Approx(one_low_closed(k)).epsilon(1e-10));
  }
  for (double k : {4.0, 100.0, 1e4}) {
    const double q = rho_general(DirectionLaw::uniform(3), diag({k, 1, 1}),
                                 SphereQuadrature{})
                         .rho;
    REQUIRE(q == Approx(one_low_closed(k)).epsilon(1e-10));
  }
  const double ratio = rho_3d_one_low(1e4) / rho_3d_one_low(1e2);
  REQUIRE(std::abs(ratio / 0.02 - 1) < 0.15);
  double prev = rho_3d_one_low(1);
  for (int j = 1; j <= 20; ++j) {
    const double cur = rho_3d_one_low(std::ldexp(1.0, j));
    REQUIRE(cur < prev);
    prev = cur;
  }
  REQUIRE(code_of([] { rho_3d_one_low(0.9); }) == ErrorCode::BadKappa);
}

TEST_CASE("one high mode in three dimensions", "[rates]") {
  REQUIRE(rho_3d_one_high(1).rho == Approx(1.0 / 6.0).epsilon(1e-12));
  for (double k : {4.0, 100.0, 1e4})
    REQUIRE(rho_3d_one_high(k).rho ==
            Approx(one_high_closed(k)).epsilon(1e-10));
  const double ratio = rho_3d_one_high(1e4).rho / rho_3d_one_high(1e2).rho;
  REQUIRE(std::abs(ratio / 0.1 - 1) < 0.15);
  const RateReport r = rho_3d_one_high(100);
  REQUIRE(std::abs(r.minimizer(2)) < 1e-6);
  REQUIRE(r.eigenspace_dim == 2);
  REQUIRE(code_of([] { rho_3d_one_high(0); }) == ErrorCode::BadKappa);
}

TEST_CASE("one low mode in four dimensions", "[rates]") {
  REQUIRE(rho_4d_one_low(1) == Approx(0.125));
  REQUIRE(rho_4d_one_low(4) == Approx(1.0 / 18.0));
  REQUIRE(rho_4d_one_low(1e4) == Approx(0.5e-4 / (1.01 * 1.01)));
  for (double k : {1.0, 10.0, 100.0}) {
    const CovarianceSpec c = diag({k, 1, 1, 1});
    const RateReport exact =
        rho_general(DirectionLaw::uniform(4), c, RadialIntegral{});
    REQUIRE(exact.rho == Approx(rho_4d_one_low(k)).epsilon(1e-10));
    MonteCarlo mc;
    mc.samples = 10'000'000;
    mc.seed = 5;
    const RateReport r = rho_general(DirectionLaw::uniform(4), c, mc);
    REQUIRE(r.method == "eigen-mc");
    REQUIRE(r.std_error > 0);
    REQUIRE(std::abs(r.rho - rho_4d_one_low(k)) < 4 * r.std_error);
  }
}

TEST_CASE("two-scale approximation", "[rates]") {
  REQUIRE(rho_two_scale_approx(5, 0, 100) == Approx(0.1));
  REQUIRE(rho_two_scale_approx(50, 50, 100) == Approx(0.5 / 5050));
  REQUIRE(rho_two_scale_approx(3, 2, 10) > rho_two_scale_approx(4, 2, 10));
  REQUIRE(rho_two_scale_approx(3, 2, 10) > rho_two_scale_approx(3, 3, 10));
  REQUIRE(rho_two_scale_approx(3, 2, 10) > rho_two_scale_approx(3, 2, 11));
  REQUIRE(code_of([] { rho_two_scale_approx(0, 0, 4); }) ==
          ErrorCode::BadDimensions);

  const CovarianceSpec c = case_covariance(RateCase::two_scale, 100, 50, 50);
  REQUIRE(c.dim() == 100);
  MonteCarlo mc;
  mc.samples = 1'000'000;
  mc.seed = 8;
  const RateReport r = rho_general(DirectionLaw::uniform(100), c, mc);
  REQUIRE(std::abs(r.rho / rho_two_scale_approx(50, 50, 100) - 1) < 0.2);
  const RateReport e = rho_general(DirectionLaw::uniform(100), c, RadialIntegral{});
  REQUIRE(std::abs(r.rho - e.rho) < 4 * r.std_error + 1e-3 * e.rho);
}

TEST_CASE("spectral sandwich on linear test functions", "[rates]") {
  Rng rng(4);
  for (RateCase rc : {RateCase::bivariate, RateCase::three_d_low,
                      RateCase::three_d_high, RateCase::four_d_low,
                      RateCase::two_scale}) {
    for (double k : {4.0, 100.0}) {
      const CovarianceSpec c = case_covariance(rc, k, 2, 3);
      const auto d = static_cast<int>(c.dim());
      const DirectionLaw law = DirectionLaw::uniform(d);
      const Estimator est =
          d <= 3 ? Estimator{SphereQuadrature{}} : Estimator{RadialIntegral{}};
      const RateReport r = rho_general(law, c, est);
      const Matrix a = averaged_linear_action(law, c, est);
      const double top = (a * r.minimizer).norm();
      REQUIRE(std::abs(top - (1 - 2 * r.rho)) < 1e-10);
      REQUIRE(top >= 1 - 3 * r.rho - 1e-10);
      REQUIRE(top <= 1 - r.rho + 1e-10);
      // The lower bound holds for the top of the spectrum only; along the
      // largest eigenvector of M the action is 1 - mu_max, which can be
      // far below 1 - 3 rho.
      const double mu_max = (Matrix::Identity(d, d) - a)
                                .selfadjointView<Eigen::Lower>()
                                .eigenvalues()
                                .maxCoeff();
      for (int i = 0; i < 1000; ++i) {
        Vector z(d);
        for (int j = 0; j < d; ++j)
          z(j) = rng.normal();
        z.normalize();
        const double n = (a * z).norm();
        REQUIRE(n <= top + 1e-10);
        REQUIRE(n >= 1 - mu_max - 1e-10);
      }
    }
  }
  const Matrix iso = averaged_linear_action(
      DirectionLaw::uniform(3), diag({1, 1, 1}), SphereQuadrature{});
  REQUIRE((iso - Matrix::Identity(3, 3) * (2.0 / 3.0)).norm() < 1e-12);
}

TEST_CASE("linear action against a one-step simulation", "[rates]") {
  // E[zeta . C^{-1/2} X1 | x0] = ((I - M) zeta) . C^{-1/2} x0; regress over
  // a fixed grid of starts.
  Matrix m(2, 2);
  m << 4, 1, 1, 2;
  const CovarianceSpec c = build_covariance(m);
  const DirectionLaw law = DirectionLaw::uniform(2);
  const Vector zeta = (Vector(2) << 0.6, 0.8).finished();
  const Vector expected =
      averaged_linear_action(law, c, SphereQuadrature{}) * zeta;

  std::vector<Vector> starts;
  for (double u : {-2.0, -1.0, 1.0, 2.0})
    for (double v : {-2.0, 0.0, 2.0})
      starts.push_back((Vector(2) << u, v).finished());

  Rng rng(12);
  const int n = 100000;
  Matrix xtx = Matrix::Zero(2, 2);
  Vector xty = Vector::Zero(2);
  std::vector<std::pair<Vector, double>> obs;
  obs.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vector &x0 = starts[static_cast<std::size_t>(i) % starts.size()];
    const Vector z0 = c.apply_inv_sqrt(x0);
    const double y = zeta.dot(c.apply_inv_sqrt(step(c, law, {x0, 0}, rng).position));
    xtx += z0 * z0.transpose();
    xty += y * z0;
    obs.emplace_back(z0, y);
  }
  const Vector beta = xtx.ldlt().solve(xty);
  double rss = 0;
  for (const auto &[z0, y] : obs)
    rss += std::pow(y - beta.dot(z0), 2);
  const Matrix cov = rss / (n - 2) * xtx.inverse();
  for (int j = 0; j < 2; ++j)
    REQUIRE(std::abs(beta(j) - expected(j)) < 4 * std::sqrt(cov(j, j)));
}

TEST_CASE("rates are rotation and scale invariant", "[rates]") {
  Rng rng(10);
  for (int d : {2, 3}) {
    const Vector spec = d == 2 ? (Vector(2) << 9, 1).finished()
                               : (Vector(3) << 50, 3, 1).finished();
    const Matrix base = spec.asDiagonal();
    const double rho = rho_general(DirectionLaw::uniform(d),
                                   build_covariance(base), SphereQuadrature{})
                           .rho;
    for (int t = 0; t < 3; ++t) {
      const Matrix q = random_rotation(d, rng);
      const Matrix rotated = q * base * q.transpose();
      const Matrix sym = 0.5 * (rotated + rotated.transpose());
      REQUIRE(rho_general(DirectionLaw::uniform(d), build_covariance(sym),
                          SphereQuadrature{})
                  .rho == Approx(rho).epsilon(1e-10));
    }
    REQUIRE(rho_general(DirectionLaw::uniform(d), build_covariance(7.5 * base),
                        SphereQuadrature{})
                .rho == Approx(rho).epsilon(1e-12));
  }
}

TEST_CASE("rate cases and table sweep", "[rates]") {
  REQUIRE(parse_rate_case("3d-high") == RateCase::three_d_high);
  REQUIRE(to_string(RateCase::four_d_low) == "4d-low");
  REQUIRE(code_of([] { parse_rate_case("5d"); }) == ErrorCode::ConfigInvalid);
  REQUIRE(case_covariance(RateCase::three_d_high, 9).matrix() ==
          Matrix((Vector(3) << 9, 9, 1).finished().asDiagonal()));

  const Table1 t = table1({100, 1000});
  REQUIRE(t.rows.size() == 8);
  REQUIRE(t.slopes.size() == 4);
  REQUIRE(t.compensated.size() == 2);
  for (const Table1Row &row : t.rows)
    REQUIRE(row.rho == Approx(row.rho_formula).epsilon(1e-9));
  REQUIRE(code_of([] { table1({100}); }) == ErrorCode::BadInputs);
}
