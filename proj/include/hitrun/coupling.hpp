#pragma once

#include "hitrun/directions.hpp"
#include "hitrun/gaussian_model.hpp"
#include "hitrun/parallel.hpp"
#include "hitrun/stats.hpp"

#include <cstdint>
#include <vector>

namespace hitrun {

/// Two chains driven by the same direction and normal draws.
///
/// The natural-coordinate difference C^{-1/2}(a - b) is carried alongside
/// the positions and updated by projection, so that the gap stays accurate
/// after it has shrunk far below the size of the positions.
struct CoupledPair {
  Vector position_a;
  Vector position_b;
  Vector natural_difference;
  std::uint64_t step_count = 0;
  double natural_gap = 0.0;
};

CoupledPair make_coupled_pair(const CovarianceSpec &c, const Vector &a,
                              const Vector &b);

/// z - (z.w / |w|^2) w.
Vector project_orthogonal(const Vector &z, const Vector &w);

/// Draws v ~ law, then z ~ N(0, 1) (the order used by step) and moves both
/// positions.
CoupledPair coupled_step(const CovarianceSpec &c, const DirectionLaw &law,
                         const CoupledPair &pair, Rng &rng);

struct ContractionOptions {
  /// Fit window [begin, end) in steps; negative values select the default,
  /// steps n/5 through n.
  long long window_begin = -1;
  long long window_end = -1;
  ParallelOptions parallel{};
};

struct ContractionResult {
  /// Replica averages for k = 0..n_steps.
  std::vector<double> mean_sq_gap;
  std::vector<double> se; // standard error of mean_sq_gap
  std::vector<double> mean_gap;
  DecayFit fit; // log mean_sq_gap against k
  std::size_t replicas = 0;
  bool coalesced = false;
};

/// Replica r uses the stream derive_seed(seed, r).
ContractionResult contraction_experiment(const CovarianceSpec &c,
                                         const DirectionLaw &law,
                                         const Vector &a0, const Vector &b0,
                                         std::size_t n_steps,
                                         std::size_t n_replicas,
                                         std::uint64_t seed,
                                         const ContractionOptions &options = {});

} // namespace hitrun
