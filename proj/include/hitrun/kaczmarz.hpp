#pragma once

#include "hitrun/directions.hpp"
#include "hitrun/parallel.hpp"
#include "hitrun/rates.hpp"
#include "hitrun/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hitrun {

/// Consistent system A x = b with A of size d x m, d >= m and full column
/// rank.
struct KaczmarzProblem {
  Matrix a;
  Vector b;
  Vector x_star;
  double frobenius_sq = 0.0;
};

/// Solves for x_star by SVD. Fails with RankDeficient when the smallest
/// singular value is at most 1e-10 times the largest, and with Inconsistent
/// when |A x_star - b| > 1e-8 (1 + |b|).
KaczmarzProblem build_problem(const Matrix &a, const Vector &b);

/// A = [[0, 1], [a, 1]].
Matrix example_matrix(double a);

/// Projects x onto the hyperplane {y : v.(A y - b) = 0} for v ~ law on
/// S^{d-1}:
///   x' = x - (g.x - beta) g,  g = A^T v / |A^T v|,  beta = v.b / |A^T v|.
/// Draws with |A^T v| < 1e-14 |A|_F are redrawn (up to 100 times) for
/// continuous laws and rejected with DegenerateDirection for discrete ones.
Vector kaczmarz_step(const KaczmarzProblem &problem, const DirectionLaw &law,
                     const Vector &x, Rng &rng);

/// lambda_min(A^T A) / (2 |A|_F^2), the rate of row selection with
/// probabilities |A^T e_i|^2 / |A|_F^2.
RateReport rate_classical(const Matrix &a);
/// sigma_min(A)^2 / (2 |A|_F^2).
double rate_classical_lower_bound(const Matrix &a);

/// lambda_min(E[g g^T]) / 2 with g = A^T v / |A^T v|, v ~ law.
RateReport rate_general(const Matrix &a, const DirectionLaw &law,
                        const Estimator &estimator);
RateReport rate_general(const Matrix &a, const DirectionLaw &law);

struct KaczmarzTrace {
  std::vector<Vector> iterates;
  std::vector<double> errors; // |x_k - x_star|
};

KaczmarzTrace solve(const KaczmarzProblem &problem, const DirectionLaw &law,
                    const Vector &x0, std::uint64_t n_iters, Rng &rng);

enum class KaczmarzVariant { classical, coordinate_free };

std::string to_string(KaczmarzVariant variant);

/// Law on S^{d-1} for a variant: rows(A) or uniform(d).
DirectionLaw variant_law(const Matrix &a, KaczmarzVariant variant);

struct EnsembleOptions {
  /// Number of recorded iterations (roughly evenly spaced, always including
  /// 0 and n_iters).
  std::size_t record_points = 2000;
  /// The fit uses recorded iterations k >= fit_from * n_iters.
  double fit_from = 0.2;
  ParallelOptions parallel{};
};

struct KaczmarzCurve {
  std::vector<std::uint64_t> iters;
  std::vector<double> mean_error;    // E|x_k - x*|
  std::vector<double> mean_sq_error; // E|x_k - x*|^2
  std::vector<double> se;            // standard error of mean_sq_error
  DecayFit fit;                      // log mean_sq_error against k
  std::size_t replicas = 0;
};

/// Iterations 0 = k_0 < ... < k_last = n, about `points` of them evenly
/// spaced; every iteration when n + 1 <= points.
std::vector<std::uint64_t> record_grid(std::uint64_t n, std::size_t points);

/// Replica r uses the stream derive_seed(seed, r) and starts from x0.
KaczmarzCurve kaczmarz_ensemble(const KaczmarzProblem &problem,
                                const DirectionLaw &law, const Vector &x0,
                                std::uint64_t n_iters, std::size_t replicas,
                                std::uint64_t seed,
                                const EnsembleOptions &options = {});

struct ConvergenceResult {
  double a = 0.0;
  KaczmarzVariant variant = KaczmarzVariant::classical;
  RateReport rate;
  std::uint64_t iters = 0;
  KaczmarzCurve curve;
  /// Fitted per-iteration decay of E|x_k|^2, i.e. -slope.
  double decay = 0.0;
};

/// A = example_matrix(a), b = 0, x0 = (-10, 0). n_iters = 0 selects
/// ceil(6 / rho).
ConvergenceResult convergence_experiment(double a, KaczmarzVariant variant,
                                         std::size_t replicas,
                                         std::uint64_t n_iters,
                                         std::uint64_t seed,
                                         const EnsembleOptions &options = {});

} // namespace hitrun
