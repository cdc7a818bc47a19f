#pragma once

#include "hitrun/directions.hpp"
#include "hitrun/gaussian_model.hpp"
#include "hitrun/rng.hpp"

#include <cstdint>
#include <vector>

namespace hitrun {

struct ChainState {
  Vector position;
  std::uint64_t step_count = 0;
};

/// Law N(mean, variance) of the signed displacement H along the line
/// x + H v under the target N(0, C).
struct Displacement {
  double mean = 0.0;
  double variance = 1.0;
};

Displacement displacement_law(const CovarianceSpec &c, const Vector &x,
                              const Vector &v);

/// One kernel move for a given direction v and standard normal z, computed
/// in natural coordinates:
///   C^{-1/2} x' = C^{-1/2} x - (C^{-1/2} x . w) w + z w,
///   w = C^{-1/2} v / |C^{-1/2} v|.
Vector transition(const CovarianceSpec &c, const Vector &x, const Vector &v,
                  double z);

/// The same move as x + H v with H = mean + sqrt(variance) z.
Vector transition_direct(const CovarianceSpec &c, const Vector &x,
                         const Vector &v, double z);

/// Draws v ~ law, then z ~ N(0, 1), and moves. Debug builds check the two
/// forms against each other.
ChainState step(const CovarianceSpec &c, const DirectionLaw &law,
                const ChainState &state, Rng &rng);

struct ChainOptions {
  bool store_positions = true;
  /// Past this many stored positions every other one is dropped and the
  /// storage stride doubles.
  std::size_t max_positions = 1'000'000;
  /// Running moments use steps >= burn_in only.
  std::uint64_t burn_in = 0;
};

struct Trajectory {
  std::vector<std::uint64_t> stored_steps;
  std::vector<Vector> positions;
  std::uint64_t stride = 1;
  /// |x_k|_{C^{-1/2}} for k = 0..n_steps.
  std::vector<double> natural_norms;
  Vector mean;
  Matrix covariance; // unbiased, over steps >= burn_in
  std::uint64_t moment_count = 0;
  ChainState final_state;
};

Trajectory run_chain(const CovarianceSpec &c, const DirectionLaw &law,
                     const Vector &x0, std::uint64_t n_steps, Rng &rng,
                     const ChainOptions &options = {});

/// Log transition density of the uniform-direction kernel at y from x,
///   log[(2 / a_{d-1}) |C^{-1/2}(y-x)| / (sqrt(2 pi) |y-x|^d)
///       exp(-|C^{-1/2}y|^2/2 + |C^{-1/2}x|^2/2
///           - (x.C^{-1}(y-x))^2 / (2 |C^{-1/2}(y-x)|^2))],
/// a_{d-1} = 2 pi^{d/2} / Gamma(d/2) the area of the unit sphere.
double transition_log_density(const CovarianceSpec &c, const DirectionLaw &law,
                              const Vector &x, const Vector &y);

} // namespace hitrun
