#include "hitrun/overlap.hpp"

#include "hitrun/errors.hpp"
#include "hitrun/quadrature.hpp"
#include "hitrun/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace hitrun {

namespace {

constexpr double pi = std::numbers::pi;

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    fail(ErrorCode::BadEpsilon, "epsilon must lie in (0, 1)");
}

/// Constants as affine functions of the natural norms |x| and |x|^2.
struct ConstantTerms {
  double c1_const, c1_lin;
  double c2_const, c2_lin, c2_quad;
  double c3_const, c3_lin;
};

ConstantTerms constant_terms(const CovarianceSpec &c, double eps) {
  const double m = c.m();
  const double M = c.M();
  const double kappa = c.kappa();
  const double d = static_cast<double>(c.dim());
  const double a = 1.0 / (eps * std::sqrt(m));
  const double tail = std::sqrt(M) + 1.0 / std::sqrt(m) + 2.0;
  const double m4 = std::pow(M, 0.25);
  ConstantTerms t;
  t.c1_lin = a;
  t.c1_const = 2.0 * eps * std::sqrt(M) + 1.0;
  t.c2_quad = 2.0 * a;
  t.c2_lin = 2.0;
  t.c2_const = (a + 2.0 * eps * std::sqrt(kappa)) * (d - 1.0) + 2.0 * a +
               tail * std::sqrt(kappa);
  t.c3_lin = std::sqrt(3.0) * m4;
  t.c3_const = std::sqrt(2.0 * (1.0 + std::log(1.0 / eps))) * m4 *
                   std::sqrt(d - 1.0) +
               std::sqrt(2.0) * m4 * std::sqrt(tail);
  return t;
}

/// Uniform-direction kernel in d = 2 with the pieces of its density that
/// depend only on the centre precomputed.
class Kernel2 {
public:
  Kernel2(const Eigen::Matrix2d &precision, const Eigen::Vector2d &centre)
      : p_(precision), centre_(centre), pc_(precision * centre),
        qc_(centre.dot(precision * centre)) {}

  /// p(centre, y) for y != centre.
  double density(const Eigen::Vector2d &y) const {
    const Eigen::Vector2d delta = y - centre_;
    const double s2 = delta.dot(p_ * delta);
    const double r2 = delta.squaredNorm();
    const double cross = pc_.dot(delta);
    const double qy = y.dot(p_ * y);
    return norm_ * std::sqrt(s2) / r2 *
           std::exp(-0.5 * qy + 0.5 * qc_ - 0.5 * cross * cross / s2);
  }

  /// r p(centre, centre + r u) for a unit vector u; the singularity at the
  /// centre cancels and what remains is a Gaussian in r.
  double ray_density(const Eigen::Vector2d &u, double r) const {
    const double su2 = u.dot(p_ * u);
    const double a = pc_.dot(u) / su2;
    const double t = r + a;
    return norm_ * std::sqrt(su2) * std::exp(-0.5 * su2 * t * t);
  }

  const Eigen::Vector2d &centre() const { return centre_; }

private:
  // (2 / a_1) / sqrt(2 pi) with a_1 = 2 pi.
  static constexpr double norm_ = 1.0 / (pi * 2.5066282746310002);
  Eigen::Matrix2d p_;
  Eigen::Vector2d centre_;
  Eigen::Vector2d pc_;
  double qc_;
};

struct PatchSums {
  double abs_diff = 0.0;
  double own = 0.0;
  double other = 0.0;
};

void check_grid(const PolarGrid &grid) {
  if (grid.radial < 16 || grid.angular < 8)
    fail(ErrorCode::BadInputs, "polar grid needs r >= 16 and theta >= 8");
}

/// Integrates over the half-plane closer to own.centre(), in polar
/// coordinates about that centre. `normal` is the unit vector towards the
/// other centre, at distance `separation`.
PatchSums integrate_patch(const Kernel2 &own, const Kernel2 &other,
                          const Eigen::Vector2d &normal, double separation,
                          double radius, const PolarGrid &grid,
                          const ParallelOptions &parallel) {
  static const quad::GaussLegendre gl = quad::gauss_legendre(16);
  const int panels = std::max(1, grid.radial / 16);
  const auto n_theta = static_cast<std::size_t>(grid.angular);
  const double dtheta = 2.0 * pi / static_cast<double>(n_theta);
  const std::size_t block = 64;
  const std::size_t n_blocks = block_count(n_theta, block);
  std::vector<PatchSums> partial(n_blocks);

  for_each_block(n_blocks, parallel, [&](std::size_t b) {
    PatchSums acc;
    const std::size_t last = std::min(n_theta, (b + 1) * block);
    for (std::size_t k = b * block; k < last; ++k) {
      const double theta = dtheta * static_cast<double>(k);
      const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
      const double cosine = u.dot(normal);
      double r_max = radius;
      if (cosine > 0.0)
        r_max = std::min(radius, 0.5 * separation / cosine);
      const double h = r_max / panels;
      PatchSums ray;
      for (int p = 0; p < panels; ++p) {
        const double mid = h * (p + 0.5);
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
          const double r = mid + 0.5 * h * gl.nodes[j];
          const double w = 0.5 * h * gl.weights[j];
          const double f_own = own.ray_density(u, r);
          const double f_other = r * other.density(own.centre() + r * u);
          ray.abs_diff += w * std::abs(f_own - f_other);
          ray.own += w * f_own;
          ray.other += w * f_other;
        }
      }
      acc.abs_diff += ray.abs_diff;
      acc.own += ray.own;
      acc.other += ray.other;
    }
    partial[b] = acc;
  });

  PatchSums total;
  for (const PatchSums &p : partial) {
    total.abs_diff += p.abs_diff * dtheta;
    total.own += p.own * dtheta;
    total.other += p.other * dtheta;
  }
  return total;
}

Eigen::Vector2d as2(const Vector &v) { return Eigen::Vector2d(v(0), v(1)); }

} // namespace

OverlapConstants overlap_constants(const CovarianceSpec &c, const Vector &x,
                                   double epsilon) {
  check_epsilon(epsilon);
  require_dim(x, c.dim(), "x");
  const ConstantTerms t = constant_terms(c, epsilon);
  const double n = natural_norm(c, x);
  OverlapConstants k;
  k.c1 = t.c1_lin * n + t.c1_const;
  k.c2 = t.c2_quad * n * n + t.c2_lin * n + t.c2_const;
  k.c3 = t.c3_lin * n + t.c3_const;
  k.x = x;
  k.x_norm = n;
  k.epsilon = epsilon;
  k.m = c.m();
  k.M = c.M();
  k.kappa = c.kappa();
  k.dim = static_cast<int>(c.dim());
  return k;
}

TvBound tv_bound_pointwise(const CovarianceSpec &c, const Vector &x,
                           const Vector &xt, double epsilon) {
  const OverlapConstants k = overlap_constants(c, x, epsilon);
  require_dim(xt, c.dim(), "xt");
  const double r = natural_norm(c, x - xt);
  TvBound b;
  b.raw = std::sqrt(2.0) * (std::sqrt(k.c1) * r + std::sqrt(k.c2 * r) +
                            k.c3 * std::sqrt(epsilon));
  b.clamped = std::min(1.0, b.raw);
  return b;
}

PolarGrid parse_polar_grid(const std::string &spec) {
  PolarGrid grid;
  int seen_r = 0, seen_theta = 0;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      fail(ErrorCode::ConfigInvalid, "grid entry '" + item + "' lacks ':'");
    const std::string key = item.substr(0, colon);
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(item.substr(colon + 1), &used);
      if (used != item.size() - colon - 1)
        throw std::invalid_argument(item);
    } catch (const std::exception &) {
      fail(ErrorCode::ConfigInvalid, "grid entry '" + item + "' is not an integer");
    }
    int *slot = key == "r" ? &grid.radial : key == "theta" ? &grid.angular : nullptr;
    if (slot == nullptr)
      fail(ErrorCode::ConfigInvalid, "unknown grid key '" + key + "'");
    if ((slot == &grid.radial ? seen_r : seen_theta)++)
      fail(ErrorCode::ConfigInvalid, "grid key '" + key + "' repeated");
    *slot = value;
  }
  try {
    check_grid(grid);
  } catch (const Error &e) {
    fail(ErrorCode::ConfigInvalid, e.what());
  }
  return grid;
}

TvQuadrature tv_quadrature_2d(const CovarianceSpec &c, const Vector &x,
                              const Vector &xt, const PolarGrid &grid,
                              const ParallelOptions &parallel) {
  if (c.dim() != 2)
    fail(ErrorCode::UnsupportedDimension, "TV quadrature is two-dimensional");
  require_dim(x, 2, "x");
  require_dim(xt, 2, "xt");
  check_grid(grid);
  const double separation = (xt - x).norm();
  if (!(separation > 0.0))
    fail(ErrorCode::CoincidentPoints, "TV quadrature needs x != xt");

  const Eigen::Matrix2d precision = c.inv_matrix();
  const Kernel2 kx(precision, as2(x));
  const Kernel2 kt(precision, as2(xt));
  const Eigen::Vector2d normal = as2(xt - x) / separation;

  const double sigma_max = std::sqrt(c.largest_variance());
  const double reach = std::max(natural_norm(c, x), natural_norm(c, xt));
  TvQuadrature out;
  out.radius = sigma_max * (reach + 12.0);
  // |H| <= |mean| + sigma |Z| with |mean| <= sigma_max |x|_nat and
  // sigma <= sigma_max.
  out.tail_bound =
      std::erfc((out.radius / sigma_max - reach) / std::sqrt(2.0));

  const PatchSums px =
      integrate_patch(kx, kt, normal, separation, out.radius, grid, parallel);
  const PatchSums pt =
      integrate_patch(kt, kx, -normal, separation, out.radius, grid, parallel);
  out.tv = 0.5 * (px.abs_diff + pt.abs_diff);
  out.mass_x = px.own + pt.other;
  out.mass_xt = pt.own + px.other;
  return out;
}

double kernel_mass_2d(const CovarianceSpec &c, const Vector &x,
                      const PolarGrid &grid) {
  if (c.dim() != 2)
    fail(ErrorCode::UnsupportedDimension, "kernel mass is two-dimensional");
  require_dim(x, 2, "x");
  check_grid(grid);
  static const quad::GaussLegendre gl = quad::gauss_legendre(16);
  const Kernel2 k(c.inv_matrix(), as2(x));
  const double radius =
      std::sqrt(c.largest_variance()) * (natural_norm(c, x) + 12.0);
  const int panels = std::max(1, grid.radial / 16);
  const double h = radius / panels;
  const double dtheta = 2.0 * pi / grid.angular;
  double total = 0.0;
  for (int t = 0; t < grid.angular; ++t) {
    const double theta = dtheta * t;
    const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    double ray = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = h * (p + 0.5);
      for (std::size_t j = 0; j < gl.nodes.size(); ++j)
        ray += 0.5 * h * gl.weights[j] *
               k.ray_density(u, mid + 0.5 * h * gl.nodes[j]);
    }
    total += ray;
  }
  return total * dtheta;
}

std::int64_t mixing_time_bound(const CovarianceSpec &c, double rho,
                               double epsilon_target, double w2_init,
                               double const_c, double const_cprime) {
  if (!(rho > 0.0) || !(epsilon_target > 0.0) || !(w2_init >= 0.0) ||
      !(const_c > 0.0) || !(const_cprime > 0.0))
    fail(ErrorCode::BadInputs,
         "mixing bound needs rho, eps, constants > 0 and w2 >= 0");
  const double scale = std::max({c.kappa(), c.M(), 1.0 / c.m()});
  const double arg = const_cprime * scale * static_cast<double>(c.dim()) /
                     epsilon_target * w2_init;
  const double log_arg = std::log(arg);
  // Rounding can leave log(1) a hair above zero.
  if (!(log_arg > 1e-12))
    return 0;
  const double n = std::ceil(const_c / rho * log_arg);
  if (!std::isfinite(n))
    fail(ErrorCode::NumericalFailure, "mixing bound overflowed");
  return static_cast<std::int64_t>(n);
}

double tv_measure_bound(const EtaMoments &eta, double w2, double epsilon) {
  check_epsilon(epsilon);
  if (!(eta.c1 >= 0.0) || !(eta.c2 >= 0.0) || !(eta.c3 >= 0.0) || !(w2 >= 0.0))
    fail(ErrorCode::BadInputs, "measure bound needs nonnegative inputs");
  return std::sqrt(2.0) * (std::sqrt(eta.c1) * w2 + std::sqrt(eta.c2 * w2) +
                           eta.c3 * std::sqrt(epsilon));
}

EtaMoments gaussian_eta_moments(const CovarianceSpec &c, double epsilon,
                                MomentRule rule) {
  check_epsilon(epsilon);
  const double d = static_cast<double>(c.dim());
  const double mean_norm =
      rule == MomentRule::exact
          ? std::sqrt(2.0) *
                std::exp(std::lgamma(0.5 * (d + 1.0)) - std::lgamma(0.5 * d))
          : std::sqrt(d);
  const ConstantTerms t = constant_terms(c, epsilon);
  EtaMoments e;
  e.c1 = t.c1_lin * mean_norm + t.c1_const;
  e.c2 = t.c2_quad * d + t.c2_lin * mean_norm + t.c2_const;
  e.c3 = t.c3_lin * mean_norm + t.c3_const;
  return e;
}

EtaMoments monte_carlo_eta_moments(const CovarianceSpec &c, double epsilon,
                                   std::size_t n, std::uint64_t seed) {
  check_epsilon(epsilon);
  if (n < 2)
    fail(ErrorCode::BadInputs, "need at least two draws");
  Rng rng(seed);
  std::array<double, 3> sum{}, sum2{};
  for (std::size_t i = 0; i < n; ++i) {
    const OverlapConstants k =
        overlap_constants(c, sample_target(c, rng), epsilon);
    const std::array<double, 3> v{k.c1, k.c2, k.c3};
    for (int j = 0; j < 3; ++j) {
      sum[j] += v[j];
      sum2[j] += v[j] * v[j];
    }
  }
  const double dn = static_cast<double>(n);
  std::array<double, 3> mean{}, se{};
  for (int j = 0; j < 3; ++j) {
    mean[j] = sum[j] / dn;
    const double var =
        std::max(0.0, (sum2[j] / dn - mean[j] * mean[j]) * dn / (dn - 1.0));
    se[j] = std::sqrt(var / dn);
  }
  return {mean[0], mean[1], mean[2], se[0], se[1], se[2]};
}

double proof_epsilon(const CovarianceSpec &c, double epsilon_target,
                     double const_c) {
  if (!(epsilon_target > 0.0) || !(const_c > 0.0))
    fail(ErrorCode::BadInputs, "proof epsilon needs positive inputs");
  const double scale = std::max({c.kappa(), c.M(), 1.0 / c.m()});
  const double d = static_cast<double>(c.dim());
  return const_c / (scale * scale * d * d) * std::pow(epsilon_target, 4);
}

} // namespace hitrun
