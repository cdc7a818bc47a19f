#include <catch2/catch_amalgamated.hpp>

#include "hitrun/errors.hpp"
#include "hitrun/kaczmarz.hpp"
#include "hitrun/reference.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace hitrun;
using Catch::Approx;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v)
    out(i++) = x;
  return out;
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

// E[g g^T], g = A^T v / |A^T v|, v uniform on the circle, by the midpoint rule
// in the angle of v.
Matrix uniform_moment_2d(const Matrix &a, int n) {
  Matrix m = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * (i + 0.5) / n;
    Vector g = a.transpose() * vec({std::cos(t), std::sin(t)});
    g.normalize();
    m += g * g.transpose();
  }
  return m / n;
}

Matrix random_matrix(int rows, int cols, Rng &rng) {
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      a(i, j) = rng.normal();
  return a;
}

} // namespace

TEST_CASE("building problems", "[kaczmarz]") {
  const KaczmarzProblem p = build_problem(Matrix::Identity(2, 2), vec({1, 2}));
  REQUIRE((p.x_star - vec({1, 2})).norm() < 1e-14);
  REQUIRE(p.frobenius_sq == 2.0);

  const KaczmarzProblem q = build_problem(example_matrix(0.1), vec({0, 0}));
  REQUIRE(q.x_star.norm() < 1e-14);
  REQUIRE(example_matrix(0.1) == (Matrix(2, 2) << 0, 1, 0.1, 1).finished());

  Matrix tall(3, 2);
  tall << 1, 0, 0, 1, 1, 1;
  REQUIRE((build_problem(tall, vec({1, 2, 3})).x_star - vec({1, 2})).norm() < 1e-12);

  Matrix col(2, 1);
  col << 1, 1;
  REQUIRE(code_of([&] { build_problem(col, vec({1, 2})); }) ==
          ErrorCode::Inconsistent);
  Matrix rank1(2, 2);
  rank1 << 1, 2, 2, 4;
  REQUIRE(code_of([&] { build_problem(rank1, vec({1, 2})); }) ==
          ErrorCode::RankDeficient);
  REQUIRE(code_of([] { build_problem(Matrix::Identity(2, 2), vec({1, 2, 3})); }) ==
          ErrorCode::DimensionMismatch);
  REQUIRE(code_of([] {
            convergence_experiment(0.0, KaczmarzVariant::classical, 10, 5, 1);
          }) == ErrorCode::BadA);
  REQUIRE(code_of([] {
            convergence_experiment(1.0, KaczmarzVariant::classical, 10, 5, 1);
          }) == ErrorCode::BadA);
}

TEST_CASE("single projections", "[kaczmarz]") {
  Rng rng(3);
  Matrix a(3, 2);
  a << 2, -1, 0.5, 1, 1, 3;
  const Vector xs = vec({0.7, -1.3});
  const KaczmarzProblem p = build_problem(a, a * xs);
  const DirectionLaw law = DirectionLaw::uniform(3);

  SECTION("the solution is a fixed point") {
    for (int i = 0; i < 100; ++i)
      REQUIRE((kaczmarz_step(p, law, p.x_star, rng) - p.x_star).norm() < 1e-12);
  }
  SECTION("axes law zeroes one coordinate") {
    const KaczmarzProblem id = build_problem(Matrix::Identity(2, 2), vec({0, 0}));
    for (int i = 0; i < 50; ++i) {
      const Vector y = kaczmarz_step(id, DirectionLaw::axes(2), vec({3, -4}), rng);
      REQUIRE(((y == vec({0, -4})) || (y == vec({3, 0}))));
    }
  }
  SECTION("error moves by projection onto the hyperplane") {
    for (int i = 0; i < 200; ++i) {
      const Vector x = vec({5 * rng.normal(), 5 * rng.normal()});
      Rng fork = rng;
      const Vector v = sample_direction(law, fork);
      const Vector y = kaczmarz_step(p, law, x, rng);
      Vector g = a.transpose() * v;
      g.normalize();
      const Vector e = x - p.x_star;
      REQUIRE((y - p.x_star - (e - g.dot(e) * g)).norm() < 1e-12 * (1 + e.norm()));
      REQUIRE(std::abs(v.dot(a * y - p.b)) <= 1e-10 * (1 + p.b.norm()));
      REQUIRE((y - p.x_star).norm() <= e.norm() * (1 + 1e-14));
    }
  }
  SECTION("a zero image cannot be drawn from a discrete law") {
    Matrix b(3, 2);
    b << 1, 0, 0, 1, 0, 0;
    const KaczmarzProblem z = build_problem(b, vec({0, 0, 0}));
    const DirectionLaw third = DirectionLaw::support({vec({0, 0, 1})}, {}, false);
    REQUIRE(code_of([&] { kaczmarz_step(z, third, vec({1, 1}), rng); }) ==
            ErrorCode::DegenerateDirection);
  }
}

TEST_CASE("one-step mean identity", "[kaczmarz]") {
  Matrix a(3, 2);
  a << 2, -1, 0.5, 1, 1, 3;
  const KaczmarzProblem p = build_problem(a, vec({0, 0, 0}));
  const Vector x0 = vec({1.5, -2});

  SECTION("discrete: exact enumeration") {
    const DirectionLaw law = DirectionLaw::rows(a);
    Matrix m = Matrix::Zero(2, 2);
    double expected = 0;
    for (std::size_t i = 0; i < law.atoms().size(); ++i) {
      Vector g = a.transpose() * law.atoms()[i];
      g.normalize();
      m += law.weights()[i] * g * g.transpose();
      expected += law.weights()[i] * (x0 - g.dot(x0) * g).squaredNorm();
    }
    REQUIRE(std::abs(expected - (x0.squaredNorm() - x0.dot(m * x0))) < 1e-10);
    REQUIRE(2 * rate_classical(a).rho ==
            Approx(m.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff())
                .epsilon(1e-12));
  }
  SECTION("uniform: simulation") {
    const DirectionLaw law = DirectionLaw::uniform(3);
    const Matrix m = second_moment_of_map(law, a.transpose(), RadialIntegral{}).matrix;
    Rng rng(44);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double v = kaczmarz_step(p, law, x0, rng).squaredNorm();
      s += v;
      s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    REQUIRE(std::abs(mean - (x0.squaredNorm() - x0.dot(m * x0))) < 4 * se);
  }
}

TEST_CASE("classical rate", "[kaczmarz]") {
  REQUIRE(rate_classical(Matrix::Identity(2, 2)).rho == Approx(0.25));
  const double lmin = (2.01 - std::sqrt(4.0001)) / 2;
  REQUIRE(lmin == Approx(4.98750e-3).epsilon(1e-5));
  const RateReport r = rate_classical(example_matrix(0.1));
  REQUIRE(r.rho == Approx(lmin / (2 * 2.01)).epsilon(1e-10));
  REQUIRE(r.rho == Approx(1.2407e-3).epsilon(1e-4));
  REQUIRE(rate_classical(-3.5 * example_matrix(0.1)).rho ==
          Approx(r.rho).epsilon(1e-12));
  REQUIRE(rate_classical_lower_bound(example_matrix(0.1)) ==
          Approx(r.rho).epsilon(1e-10));

  Rng rng(8);
  for (int t = 0; t < 5; ++t) {
    const Matrix a = random_matrix(5, 3, rng);
    REQUIRE(rate_general(a, DirectionLaw::rows(a)).rho ==
            Approx(rate_classical(a).rho).epsilon(1e-12));
  }
}

TEST_CASE("general rate", "[kaczmarz]") {
  for (int d : {2, 3, 5}) {
    const Matrix id = Matrix::Identity(d, d);
    REQUIRE(rate_general(id, DirectionLaw::uniform(d), RadialIntegral{}).rho ==
            Approx(0.5 / d).epsilon(1e-10));
  }

  const double a = 0.1;
  const Matrix ex = example_matrix(a);
  const Matrix oracle = uniform_moment_2d(ex, 400000);
  const double oracle_rho =
      0.5 * oracle.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff();
  const RateReport r = rate_general(ex, DirectionLaw::uniform(2));
  REQUIRE(std::abs(r.rho - oracle_rho) < 1e-9);
  REQUIRE(r.rho == Approx(0.0237528).margin(1e-7));
  // The scalar closed form a(1 + a) / (2 (2 + a (2 + a))) is half the first
  // diagonal entry of the moment matrix, not half its smallest eigenvalue.
  const double closed = a * (1 + a) / (2 * (2 + a * (2 + a)));
  REQUIRE(closed == Approx(0.024887).margin(1e-6));
  REQUIRE(std::abs(0.5 * oracle(0, 0) - closed) < 1e-9);
  REQUIRE(r.rho < closed);

  MonteCarlo mc;
  mc.samples = 1'000'000;
  mc.seed = 2;
  const RateReport m = rate_general(ex, DirectionLaw::uniform(2), mc);
  REQUIRE(std::abs(m.rho - r.rho) < 4 * m.std_error);
}

TEST_CASE("solving", "[kaczmarz]") {
  const KaczmarzProblem p = build_problem(example_matrix(0.1), vec({0, 0}));
  Rng rng(1);
  const KaczmarzTrace t = solve(p, DirectionLaw::uniform(2), p.x_star, 50, rng);
  REQUIRE(t.iterates.size() == 51);
  for (double e : t.errors)
    REQUIRE(e == 0.0);

  Rng r2(2);
  const KaczmarzTrace u =
      solve(p, DirectionLaw::uniform(2), vec({-10, 0}), 500, r2);
  for (std::size_t k = 1; k < u.errors.size(); ++k)
    REQUIRE(u.errors[k] <= u.errors[k - 1] * (1 + 1e-14));
}

TEST_CASE("recording grid", "[kaczmarz]") {
  REQUIRE(record_grid(5, 100) == std::vector<std::uint64_t>{0, 1, 2, 3, 4, 5});
  const auto g = record_grid(100000, 2000);
  REQUIRE(g.front() == 0);
  REQUIRE(g.back() == 100000);
  REQUIRE(g.size() <= 2001);
  REQUIRE(g.size() >= 1900);
  for (std::size_t i = 1; i < g.size(); ++i)
    REQUIRE(g[i] > g[i - 1]);
}

TEST_CASE("isotropic ensemble halves the squared error", "[kaczmarz]") {
  const KaczmarzProblem p = build_problem(Matrix::Identity(2, 2), vec({0, 0}));
  EnsembleOptions opts;
  opts.fit_from = 0.0;
  // Short horizon: the per-replica factor sin^2 has geometric mean 1/4.
  const KaczmarzCurve c =
      kaczmarz_ensemble(p, DirectionLaw::uniform(2), vec({1, 0}), 10, 100000, 5, opts);
  REQUIRE(c.mean_sq_error[0] == 1.0);
  for (std::size_t k = 1; k <= 3; ++k)
    REQUIRE(std::abs(c.mean_sq_error[k] - std::pow(0.5, k)) < 4 * c.se[k]);
  REQUIRE(std::abs(c.fit.slope - std::log(0.5)) < 4 * c.fit.slope_se + 1e-3);

  const KaczmarzCurve z =
      kaczmarz_ensemble(p, DirectionLaw::uniform(2), vec({0, 0}), 10, 100, 5);
  for (double e : z.mean_sq_error)
    REQUIRE(e == 0.0);
}

TEST_CASE("ensemble matches the serial reference", "[kaczmarz][parallel]") {
  Matrix a(3, 2);
  a << 2, -1, 0.5, 1, 1, 3;
  const KaczmarzProblem p = build_problem(a, a * vec({0.5, 0.5}));
  const DirectionLaw law = DirectionLaw::uniform(3);
  EnsembleOptions serial;
  serial.parallel.execution = Execution::serial;
  EnsembleOptions two;
  two.parallel.workers = 2;
  const Vector x0 = vec({4, -4});
  const KaczmarzCurve c = kaczmarz_ensemble(p, law, x0, 60, 1500, 13);
  const KaczmarzCurve s = kaczmarz_ensemble(p, law, x0, 60, 1500, 13, serial);
  const KaczmarzCurve w = kaczmarz_ensemble(p, law, x0, 60, 1500, 13, two);
  const KaczmarzCurve r = reference::kaczmarz_ensemble(p, law, x0, 60, 1500, 13);
  REQUIRE(c.mean_sq_error == s.mean_sq_error);
  REQUIRE(c.mean_sq_error == w.mean_sq_error);
  REQUIRE(c.iters == r.iters);
  for (std::size_t k = 0; k < c.iters.size(); ++k) {
    REQUIRE(c.mean_sq_error[k] == Approx(r.mean_sq_error[k]).epsilon(1e-11));
    REQUIRE(c.mean_error[k] == Approx(r.mean_error[k]).epsilon(1e-11));
  }
}

TEST_CASE("experiments decay at least at the guaranteed rate", "[kaczmarz]") {
  for (KaczmarzVariant v :
       {KaczmarzVariant::classical, KaczmarzVariant::coordinate_free}) {
    const ConvergenceResult r = convergence_experiment(0.1, v, 2000, 0, 6);
    REQUIRE(r.iters == static_cast<std::uint64_t>(std::ceil(6 / r.rate.rho)));
    REQUIRE(r.decay >= 2 * r.rate.rho - 4 * r.curve.fit.slope_se);
    REQUIRE(r.curve.mean_sq_error[0] == 100.0);
  }
  REQUIRE(to_string(KaczmarzVariant::coordinate_free) == "free");
}
