#pragma once

#include "hitrun/gaussian_model.hpp"
#include "hitrun/parallel.hpp"

#include <cstdint>
#include <string>

namespace hitrun {

/// One-step overlap constants at a start point x. Norms of x are natural
/// norms |x|_{C^{-1/2}}; m and M are the extreme eigenvalues of C^{-1}.
///   c1 = |x| / (eps sqrt(m)) + 2 eps sqrt(M) + 1
///   c2 = 2 |x|^2 / (eps sqrt(m)) + 2 |x|
///        + (1 / (eps sqrt(m)) + 2 eps sqrt(kappa)) (d - 1) + 2 / (eps sqrt(m))
///        + (sqrt(M) + 1 / sqrt(m) + 2) sqrt(kappa)
///   c3 = sqrt(3) M^{1/4} |x| + sqrt(2 (1 + log(1/eps))) M^{1/4} sqrt(d - 1)
///        + sqrt(2) M^{1/4} sqrt(sqrt(M) + 1 / sqrt(m) + 2)
struct OverlapConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  Vector x;
  double x_norm = 0.0;
  double epsilon = 0.0;
  double m = 0.0;
  double M = 0.0;
  double kappa = 0.0;
  int dim = 0;
};

OverlapConstants overlap_constants(const CovarianceSpec &c, const Vector &x,
                                   double epsilon);

struct TvBound {
  double raw = 0.0;
  double clamped = 0.0; // min(1, raw)
};

/// sqrt(2) (c1^{1/2} r + c2^{1/2} r^{1/2} + c3 eps^{1/2}) with the constants
/// taken at x and r = |x - xt|_{C^{-1/2}}.
TvBound tv_bound_pointwise(const CovarianceSpec &c, const Vector &x,
                           const Vector &xt, double epsilon);

struct PolarGrid {
  int radial = 2048;  // Gauss-Legendre nodes per ray (16-point panels)
  int angular = 4096; // trapezoid nodes in angle
};

/// Parses "r:2048,theta:4096"; either key may be omitted.
PolarGrid parse_polar_grid(const std::string &spec);

struct TvQuadrature {
  double tv = 0.0;
  double mass_x = 0.0;  // integral of p(x, .) over the truncated plane
  double mass_xt = 0.0; // integral of p(xt, .)
  double radius = 0.0;  // radial truncation about each centre
  double tail_bound = 0.0;
};

/// (1/2) int |p(x, y) - p(xt, y)| dy for the uniform-direction kernel in
/// d = 2. The plane is cut along the perpendicular bisector of [x, xt] and
/// each half is integrated in polar coordinates about its own centre, where
/// the radial Jacobian cancels that kernel's singularity. Rays are truncated
/// at R = sigma_max (max(|x|, |xt|) + 12), where sigma_max^2 is the largest
/// eigenvalue of C; tail_bound bounds the probability either kernel puts
/// beyond that distance.
TvQuadrature tv_quadrature_2d(const CovarianceSpec &c, const Vector &x,
                              const Vector &xt, const PolarGrid &grid = {},
                              const ParallelOptions &parallel = {});

/// Integral of p(x, .) over the plane in polar coordinates about x, d = 2.
double kernel_mass_2d(const CovarianceSpec &c, const Vector &x,
                      const PolarGrid &grid = {});

/// ceil(const_c / rho * log(const_cprime * max(kappa, M, 1/m) * d / eps
///      * w2_init)), and 0 when the logarithm is not positive. The absolute
/// constants are unknown; results are order-of-magnitude only.
std::int64_t mixing_time_bound(const CovarianceSpec &c, double rho,
                               double epsilon_target, double w2_init,
                               double const_c = 1.0, double const_cprime = 1.0);

/// Expectations of c1, c2, c3 under a start distribution eta.
struct EtaMoments {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  // Standard errors, for Monte Carlo estimates.
  double c1_se = 0.0;
  double c2_se = 0.0;
  double c3_se = 0.0;
};

/// sqrt(2) (eta(c1)^{1/2} w2 + eta(c2)^{1/2} w2^{1/2} + eta(c3) eps^{1/2}).
double tv_measure_bound(const EtaMoments &eta, double w2, double epsilon);

/// Moments under eta = N(0, C), where |x|_{C^{-1/2}} is chi-distributed with
/// d degrees of freedom: E|x|^2 = d and E|x| = sqrt(2) Gamma((d+1)/2) /
/// Gamma(d/2) (`exact`), or E|x| replaced by its upper bound sqrt(d).
enum class MomentRule { exact, sqrt_d_bound };
EtaMoments gaussian_eta_moments(const CovarianceSpec &c, double epsilon,
                                MomentRule rule);

/// Monte Carlo moments over n draws from N(0, C).
EtaMoments monte_carlo_eta_moments(const CovarianceSpec &c, double epsilon,
                                   std::size_t n, std::uint64_t seed);

/// eps = const_c max(kappa, M, 1/m)^{-2} d^{-2} eps_target^4.
double proof_epsilon(const CovarianceSpec &c, double epsilon_target,
                     double const_c = 1.0);

} // namespace hitrun
