#include <catch2/catch_amalgamated.hpp>

#include "hitrun/errors.hpp"
#include "hitrun/hit_and_run.hpp"
#include "hitrun/overlap.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace hitrun;
using Catch::Approx;

namespace {

CovarianceSpec diag(std::vector<double> v) {
  return build_diagonal_covariance(v);
}

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

} // namespace

TEST_CASE("overlap constants", "[overlap]") {
  const OverlapConstants k = overlap_constants(diag({1, 1}), vec({0, 0}), 0.5);
  REQUIRE(k.c1 == Approx(2.0).epsilon(1e-14));
  REQUIRE(k.c2 == Approx(11.0).epsilon(1e-14));
  const double c3 =
      std::sqrt(2.0) * std::sqrt(1 + std::log(2.0)) + 2 * std::sqrt(2.0);
  REQUIRE(k.c3 == Approx(c3).epsilon(1e-14));
  REQUIRE(k.c3 == Approx(4.669).margin(5e-4));

  // diag(4, 1): m = 1/4, M = 1, kappa = 4; x = (2, 0) has natural norm 1.
  const OverlapConstants h = overlap_constants(diag({4, 1}), vec({2, 0}), 0.1);
  REQUIRE(h.x_norm == Approx(1.0));
  REQUIRE(h.c1 == Approx(1 / 0.05 + 0.2 + 1));
  REQUIRE(h.c2 == Approx(2 / 0.05 + 2 + (1 / 0.05 + 0.4) + 2 / 0.05 + 5 * 2));
  REQUIRE(h.c3 == Approx(std::sqrt(3.0) + std::sqrt(2 * (1 + std::log(10.0))) +
                         std::sqrt(2.0) * std::sqrt(5.0)));

  SECTION("c3 sees only the natural norm of x") {
    const CovarianceSpec c = diag({4, 1});
    const double a = overlap_constants(c, vec({2, 0}), 0.2).c3;
    const double b = overlap_constants(c, vec({0, -1}), 0.2).c3;
    const double r = overlap_constants(c, vec({std::sqrt(2.0), std::sqrt(0.5)}), 0.2).c3;
    REQUIRE(a == Approx(b).epsilon(1e-14));
    REQUIRE(a == Approx(r).epsilon(1e-14));
  }
  SECTION("inverse-epsilon terms shrink as epsilon doubles") {
    const CovarianceSpec c = diag({9, 1, 1});
    const Vector x = vec({1, 2, -1});
    const OverlapConstants lo = overlap_constants(c, x, 0.2);
    const OverlapConstants hi = overlap_constants(c, x, 0.4);
    // Subtract the epsilon-increasing pieces before comparing.
    REQUIRE(lo.c1 - 2 * 0.2 * std::sqrt(lo.M) >= hi.c1 - 2 * 0.4 * std::sqrt(hi.M));
    const double up = 2 * std::sqrt(lo.kappa) * (lo.dim - 1);
    REQUIRE(lo.c2 - 0.2 * up >= hi.c2 - 0.4 * up);
    REQUIRE(lo.c3 >= hi.c3);
  }
  for (double eps : {0.0, 1.0, -0.3, 1.5})
    REQUIRE(code_of([eps] { overlap_constants(diag({1, 1}), vec({0, 0}), eps); }) ==
            ErrorCode::BadEpsilon);
}

TEST_CASE("pointwise TV bound", "[overlap]") {
  const CovarianceSpec c = diag({4, 1});
  const Vector x = vec({-2, 0});

  double prev = 1e300;
  for (int k = 1; k <= 12; ++k) {
    const double eps = std::pow(10.0, -k);
    const TvBound b = tv_bound_pointwise(c, x, x, eps);
    const double c3 = overlap_constants(c, x, eps).c3;
    REQUIRE(b.raw == Approx(std::sqrt(2.0) * c3 * std::sqrt(eps)).epsilon(1e-14));
    REQUIRE(b.raw < prev);
    prev = b.raw;
  }
  REQUIRE(prev < 1e-4);

  double last = 0;
  for (double t : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
    const TvBound b = tv_bound_pointwise(c, x, x + t * vec({0.6, 0.8}), 0.1);
    REQUIRE(b.raw >= last);
    REQUIRE(b.clamped == std::min(1.0, b.raw));
    last = b.raw;
  }
  REQUIRE(code_of([&] { tv_bound_pointwise(c, x, x, 1.0); }) ==
          ErrorCode::BadEpsilon);
}

TEST_CASE("TV quadrature", "[overlap]") {
  const CovarianceSpec c = diag({4, 1});
  const Vector x = vec({-2, 0}), xt = vec({0, 1});

  const TvQuadrature q = tv_quadrature_2d(c, x, xt);
  // Regression value recorded from the default grid.
  REQUIRE(q.tv == Approx(0.5449402020731196).margin(1e-9));
  REQUIRE(q.mass_x == Approx(1.0).margin(1e-6));
  REQUIRE(q.mass_xt == Approx(1.0).margin(1e-6));
  REQUIRE(q.tail_bound < 1e-10);
  REQUIRE(q.tv <= tv_bound_pointwise(c, x, xt, 0.1).clamped + 1e-3);

  SECTION("symmetric in its arguments") {
    REQUIRE(std::abs(tv_quadrature_2d(c, xt, x).tv - q.tv) < 2e-4);
  }
  SECTION("grid converged") {
    const PolarGrid coarse{512, 1024};
    REQUIRE(std::abs(tv_quadrature_2d(c, x, xt, coarse).tv - q.tv) < 1e-4);
  }
  SECTION("nearby points barely differ") {
    const TvQuadrature n = tv_quadrature_2d(c, x, x + vec({1e-3, 0}));
    REQUIRE(n.tv <= 0.05);
    REQUIRE(n.tv >= 0.0);
  }
  SECTION("simulation oracle") {
    // TV = E_{Y ~ p(x, .)} (1 - p(xt, Y) / p(x, Y))_+ with Y drawn by one step.
    const DirectionLaw law = DirectionLaw::uniform(2);
    Rng rng(17);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const Vector y = step(c, law, {x, 0}, rng).position;
      const double lr = transition_log_density(c, law, xt, y) -
                        transition_log_density(c, law, x, y);
      const double v = std::max(0.0, 1 - std::exp(lr));
      s += v;
      s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    REQUIRE(std::abs(mean - q.tv) < 4 * se);
  }
  SECTION("preconditions") {
    REQUIRE(code_of([&] { tv_quadrature_2d(c, x, x); }) ==
            ErrorCode::CoincidentPoints);
    REQUIRE(code_of([] {
              tv_quadrature_2d(diag({1, 1, 1}), vec({0, 0, 0}), vec({1, 0, 0}));
            }) == ErrorCode::UnsupportedDimension);
  }
}

TEST_CASE("parallel TV quadrature is deterministic", "[overlap][parallel]") {
  const CovarianceSpec c = diag({4, 1});
  const PolarGrid g{256, 512};
  ParallelOptions serial;
  serial.execution = Execution::serial;
  ParallelOptions two;
  two.workers = 2;
  const double a = tv_quadrature_2d(c, vec({1, -1}), vec({-1.5, 0.5}), g).tv;
  REQUIRE(tv_quadrature_2d(c, vec({1, -1}), vec({-1.5, 0.5}), g, serial).tv == a);
  REQUIRE(tv_quadrature_2d(c, vec({1, -1}), vec({-1.5, 0.5}), g, two).tv == a);
}

TEST_CASE("polar grid parsing", "[overlap]") {
  const PolarGrid g = parse_polar_grid("r:64,theta:128");
  REQUIRE(g.radial == 64);
  REQUIRE(g.angular == 128);
  REQUIRE(parse_polar_grid("theta:32").radial == PolarGrid{}.radial);
  for (const char *bad : {"r:0", "r:abc", "phi:10", "r:16,r:32", "r=16"})
    REQUIRE(code_of([bad] { parse_polar_grid(bad); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("mixing time bound", "[overlap]") {
  const CovarianceSpec c = diag({4, 1});
  // 6 log(4 * 2 * 10 * sqrt 2) = 28.37
  REQUIRE(mixing_time_bound(c, 1.0 / 6.0, 0.1, std::sqrt(2.0)) == 29);
  // C = I_3, rho = 1/6: 6 log(3 / 0.01) = 34.22
  REQUIRE(mixing_time_bound(diag({1, 1, 1}), 1.0 / 6.0, 0.01, 1.0) == 35);
  // diag(100, 1), rho = 0.01, C = 2, C' = 3: 200 log(3 * 100 * 2 * 100 * 0.5)
  // = 200 log 30000 = 2061.9
  REQUIRE(mixing_time_bound(diag({100, 1}), 0.01, 0.01, 0.5, 2, 3) == 2062);

  // Argument exactly 1: 4 * 2 / 0.1 * w2 = 1.
  REQUIRE(mixing_time_bound(c, 1.0 / 6.0, 0.1, 1.0 / 80.0) == 0);
  REQUIRE(mixing_time_bound(c, 1.0 / 6.0, 0.1, 1e-3) == 0);

  std::int64_t prev = mixing_time_bound(c, 0.05, 0.1, 1.0);
  for (double rho : {0.1, 0.2, 0.3}) {
    const std::int64_t n = mixing_time_bound(c, rho, 0.1, 1.0);
    REQUIRE(n <= prev);
    prev = n;
  }
  prev = 0;
  for (double eps : {0.5, 0.1, 0.01, 1e-4}) {
    const std::int64_t n = mixing_time_bound(c, 0.2, eps, 1.0);
    REQUIRE(n >= prev);
    prev = n;
  }
  REQUIRE(code_of([&] { mixing_time_bound(c, 0.0, 0.1, 1.0); }) ==
          ErrorCode::BadInputs);
  REQUIRE(code_of([&] { mixing_time_bound(c, 0.1, 0.1, -1.0); }) ==
          ErrorCode::BadInputs);
  REQUIRE(code_of([&] { mixing_time_bound(c, 0.1, 0.1, 1.0, 0.0); }) ==
          ErrorCode::BadInputs);
}

TEST_CASE("measure-level bound", "[overlap]") {
  const EtaMoments eta{3, 20, 5};
  REQUIRE(tv_measure_bound(eta, 0.0, 0.25) ==
          Approx(std::sqrt(2.0) * 5 * 0.5).epsilon(1e-15));
  REQUIRE(tv_measure_bound(eta, 4.0, 0.25) ==
          Approx(std::sqrt(2.0) * (std::sqrt(3.0) * 4 + std::sqrt(20.0) * 2 + 2.5)));
  REQUIRE(code_of([&] { tv_measure_bound(eta, 1.0, 0.0); }) ==
          ErrorCode::BadEpsilon);

  SECTION("gaussian start moments") {
    // C = I_2, eps = 1/2: E|x|^2 = 2, E|x| = sqrt(pi / 2).
    const EtaMoments g = gaussian_eta_moments(diag({1, 1}), 0.5, MomentRule::exact);
    const double ex = std::sqrt(std::numbers::pi / 2);
    REQUIRE(g.c1 == Approx(2 * ex + 2));
    REQUIRE(g.c2 == Approx(4 * 2 + 2 * ex + 3 + 4 + 4));
    REQUIRE(g.c3 == Approx(std::sqrt(3.0) * ex + std::sqrt(2 * (1 + std::log(2.0))) + 2 * std::sqrt(2.0)));
    const EtaMoments b =
        gaussian_eta_moments(diag({1, 1}), 0.5, MomentRule::sqrt_d_bound);
    REQUIRE(b.c1 == Approx(2 * std::sqrt(2.0) + 2));
    REQUIRE(b.c1 >= g.c1);
    REQUIRE(b.c2 >= g.c2);
    REQUIRE(b.c3 >= g.c3);
  }
  SECTION("Monte Carlo moments") {
    for (const CovarianceSpec &c : {diag({1, 1}), diag({4, 1}), diag({9, 2, 1})}) {
      const EtaMoments e = gaussian_eta_moments(c, 0.3, MomentRule::exact);
      const EtaMoments m = monte_carlo_eta_moments(c, 0.3, 100000, 21);
      REQUIRE(std::abs(m.c1 - e.c1) < 4 * m.c1_se);
      REQUIRE(std::abs(m.c2 - e.c2) < 4 * m.c2_se);
      REQUIRE(std::abs(m.c3 - e.c3) < 4 * m.c3_se);
    }
  }
}

TEST_CASE("proof epsilon schedule", "[overlap]") {
  // diag(4, 1): max(kappa, M, 1/m) = 4, d = 2.
  REQUIRE(proof_epsilon(diag({4, 1}), 0.1) == Approx(1e-4 / 64));
  REQUIRE(proof_epsilon(diag({1, 1, 1}), 0.5, 2.0) == Approx(2 * 0.0625 / 9));
}
