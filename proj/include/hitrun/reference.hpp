#pragma once

// Plain serial loops over the public single-step functions. They define the
// expected output of the blocked parallel kernels and exist for tests and
// benchmarks.

#include "hitrun/coupling.hpp"
#include "hitrun/directions.hpp"
#include "hitrun/kaczmarz.hpp"

#include <cstdint>

namespace hitrun::reference {

/// Mean, standard error and mean gap per step, built from coupled_step.
ContractionResult contraction_experiment(const CovarianceSpec &c,
                                         const DirectionLaw &law,
                                         const Vector &a0, const Vector &b0,
                                         std::size_t n_steps,
                                         std::size_t n_replicas,
                                         std::uint64_t seed);

/// Built from kaczmarz_step on the same recording grid as the parallel
/// kernel.
KaczmarzCurve kaczmarz_ensemble(const KaczmarzProblem &problem,
                                const DirectionLaw &law, const Vector &x0,
                                std::uint64_t n_iters, std::size_t replicas,
                                std::uint64_t seed,
                                const EnsembleOptions &options = {});

/// E[g g^T], g = F v / |F v|, one sample at a time with the batch seeds of
/// the MonteCarlo estimator. Draws with F v = 0 count as zero.
Matrix monte_carlo_second_moment(const DirectionLaw &law, const Matrix &map,
                                 std::size_t samples, std::uint64_t seed,
                                 int batches);

} // namespace hitrun::reference
