#pragma once

#include "hitrun/gaussian_model.hpp"
#include "hitrun/linalg.hpp"
#include "hitrun/parallel.hpp"
#include "hitrun/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hitrun {

/// Probability law on the unit sphere S^{d-1} from which line directions
/// are drawn.
///
/// Four variants: the uniform law; a weighted law on the coordinate axes
/// (random-scan Gibbs); an arbitrary finite support; and the row-weighted
/// law on the canonical basis of R^d, with weight |A^T e_i|^2 / |A|_F^2 for
/// a d x m matrix A (classical randomized Kaczmarz).
///
/// Discrete variants expose their atoms and weights; atoms are unit vectors
/// and weights sum to one.
class DirectionLaw {
public:
  enum class Kind { uniform_sphere, coordinate_axes, finite_support, row_weighted };

  static DirectionLaw uniform(int dim);
  static DirectionLaw axes(int dim);
  static DirectionLaw axes(std::vector<double> weights);
  /// Vectors are normalized on entry. Weights default to uniform when empty.
  static DirectionLaw support(std::vector<Vector> vectors,
                              std::vector<double> weights, bool symmetric);
  static DirectionLaw rows(const Matrix &a);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool symmetric() const { return symmetric_; }
  bool is_discrete() const { return kind_ != Kind::uniform_sphere; }

  std::span<const Vector> atoms() const { return atoms_; }
  std::span<const double> weights() const { return weights_; }

  std::string describe() const;

  /// Index of the atom selected by a uniform draw u in [0, 1).
  std::size_t atom_index(double u) const;

private:
  DirectionLaw() = default;
  void finish_discrete();

  Kind kind_ = Kind::uniform_sphere;
  int dim_ = 0;
  bool symmetric_ = true;
  std::vector<Vector> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Draws one unit direction. Uniform: a normalized vector of d independent
/// standard normals. Discrete: one uniform draw selects the atom.
Vector sample_direction(const DirectionLaw &law, Rng &rng);

/// Same draws as sample_direction, written into `out` (resized if needed).
void sample_direction_into(const DirectionLaw &law, Rng &rng, Vector &out);

/// C^{-1/2} v / |C^{-1/2} v|.
Vector pushforward_direction(const CovarianceSpec &c, const Vector &v);

// Estimators for second moments E[g g^T] of normalized images g = F v / |F v|.

/// Weighted sum over the atoms of a discrete law.
struct ExactDiscrete {};

/// Uniform law only. d = 2: periodic trapezoid rule in the angle starting
/// from `nodes_2d` nodes and doubled until successive results agree to
/// `tolerance`. d = 3: nested adaptive Gauss-Kronrod in (cos polar,
/// azimuth), in the eigenframe of F^T F.
struct SphereQuadrature {
  int nodes_2d = 2048;
  double tolerance = 1e-13;
};

/// Uniform law only, any dimension. For v uniform, F v / |F v| has the law
/// of y / |y| with y ~ N(0, F F^T); in the eigenbasis of F F^T (eigenvalues
/// s_j) the second moment is diagonal with entries
///   int_0^inf s_i / (1 + 2 t s_i) prod_j (1 + 2 t s_j)^{-1/2} dt,
/// evaluated by adaptive quadrature in log t.
struct RadialIntegral {
  double tolerance = 1e-13;
};

/// Batched Monte Carlo; batch b uses the stream derive_seed(seed, b).
struct MonteCarlo {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
  int batches = 20;
  ParallelOptions parallel{};
};

using Estimator =
    std::variant<ExactDiscrete, SphereQuadrature, RadialIntegral, MonteCarlo>;

std::string estimator_name(const Estimator &estimator);

struct SecondMoment {
  Matrix matrix;
  /// Per-batch matrices (Monte Carlo only), for batch standard errors.
  std::vector<Matrix> batches;
};

/// E[g g^T] for g = F v / |F v|, v ~ law, with F an m x d matrix.
SecondMoment second_moment_of_map(const DirectionLaw &law, const Matrix &map,
                                  const Estimator &estimator);

/// M_tau = E[w w^T] for w = C^{-1/2} v / |C^{-1/2} v|. For a diagonal C with
/// the uniform law, off-diagonal Monte Carlo entries are zero by symmetry and
/// are set to zero.
SecondMoment second_moment(const DirectionLaw &law, const CovarianceSpec &c,
                           const Estimator &estimator);

Matrix second_moment_matrix(const DirectionLaw &law, const CovarianceSpec &c,
                            const Estimator &estimator);

/// The default estimator for a law: exact for discrete laws, sphere
/// quadrature for the uniform law in d = 2, 3, Monte Carlo otherwise.
Estimator default_estimator(const DirectionLaw &law);

} // namespace hitrun
