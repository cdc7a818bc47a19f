#include "hitrun/directions.hpp"

#include "hitrun/errors.hpp"
#include "hitrun/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace hitrun {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<double> normalized_weights(std::vector<double> w, std::size_t n) {
  if (w.empty())
    w.assign(n, 1.0);
  if (w.size() != n)
    fail(ErrorCode::DimensionMismatch, "weight count does not match support");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x))
      fail(ErrorCode::BadInputs, "direction weights must be nonnegative");
    total += x;
  }
  if (!(total > 0.0))
    fail(ErrorCode::EmptySupport, "direction weights sum to zero");
  for (double &x : w)
    x /= total;
  return w;
}

} // namespace

DirectionLaw DirectionLaw::uniform(int dim) {
  if (dim < 1)
    fail(ErrorCode::DimensionZero, "direction law needs dimension >= 1");
  DirectionLaw law;
  law.kind_ = Kind::uniform_sphere;
  law.dim_ = dim;
  return law;
}

DirectionLaw DirectionLaw::axes(int dim) {
  if (dim < 1)
    fail(ErrorCode::DimensionZero, "direction law needs dimension >= 1");
  return axes(std::vector<double>(static_cast<std::size_t>(dim), 1.0));
}

DirectionLaw DirectionLaw::axes(std::vector<double> weights) {
  if (weights.empty())
    fail(ErrorCode::DimensionZero, "axes law needs at least one weight");
  DirectionLaw law;
  law.kind_ = Kind::coordinate_axes;
  const std::size_t n = weights.size();
  law.dim_ = static_cast<int>(n);
  law.weights_ = normalized_weights(std::move(weights), n);
  for (int i = 0; i < law.dim_; ++i)
    law.atoms_.push_back(Vector::Unit(law.dim_, i));
  law.finish_discrete();
  return law;
}

DirectionLaw DirectionLaw::support(std::vector<Vector> vectors,
                                   std::vector<double> weights,
                                   bool symmetric) {
  if (vectors.empty())
    fail(ErrorCode::EmptySupport, "finite support law has no vectors");
  DirectionLaw law;
  law.kind_ = Kind::finite_support;
  law.dim_ = static_cast<int>(vectors.front().size());
  if (law.dim_ < 1)
    fail(ErrorCode::DimensionZero, "support vectors have dimension zero");
  for (Vector &v : vectors) {
    require_dim(v, law.dim_, "support vector");
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      fail(ErrorCode::ZeroVector, "support vector has zero or non-finite norm");
    v /= n;
  }
  const std::size_t n = vectors.size();
  law.weights_ = normalized_weights(std::move(weights), n);
  law.atoms_ = std::move(vectors);
  law.symmetric_ = symmetric;
  law.finish_discrete();
  return law;
}

DirectionLaw DirectionLaw::rows(const Matrix &a) {
  if (a.rows() == 0 || a.cols() == 0)
    fail(ErrorCode::DimensionZero, "row-weighted law needs a non-empty matrix");
  DirectionLaw law;
  law.kind_ = Kind::row_weighted;
  law.dim_ = static_cast<int>(a.rows());
  std::vector<double> w(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    w[static_cast<std::size_t>(i)] = a.row(i).squaredNorm();
    law.atoms_.push_back(Vector::Unit(a.rows(), i));
  }
  law.weights_ = normalized_weights(std::move(w), law.atoms_.size());
  law.finish_discrete();
  return law;
}

void DirectionLaw::finish_discrete() {
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

std::size_t DirectionLaw::atom_index(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto i = static_cast<std::size_t>(it - cumulative_.begin());
  return std::min(i, cumulative_.size() - 1);
}

std::string DirectionLaw::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
  case Kind::uniform_sphere:
    out << "uniform(d=" << dim_ << ")";
    break;
  case Kind::coordinate_axes:
  case Kind::row_weighted:
    out << (kind_ == Kind::row_weighted ? "rows(" : "axes(");
    for (std::size_t i = 0; i < weights_.size(); ++i)
      out << (i ? "," : "") << weights_[i];
    out << ")";
    break;
  case Kind::finite_support:
    out << "support(n=" << atoms_.size() << ",d=" << dim_
        << (symmetric_ ? ",symmetric" : "") << ")";
    break;
  }
  return out.str();
}

void sample_direction_into(const DirectionLaw &law, Rng &rng, Vector &out) {
  if (law.is_discrete()) {
    out = law.atoms()[law.atom_index(rng.uniform())];
    return;
  }
  out.resize(law.dim());
  double n2 = 0.0;
  do {
    for (Eigen::Index i = 0; i < out.size(); ++i)
      out(i) = rng.normal();
    n2 = out.squaredNorm();
  } while (n2 == 0.0);
  out /= std::sqrt(n2);
}

Vector sample_direction(const DirectionLaw &law, Rng &rng) {
  Vector v;
  sample_direction_into(law, rng, v);
  return v;
}

Vector pushforward_direction(const CovarianceSpec &c, const Vector &v) {
  const Vector w = c.apply_inv_sqrt(v);
  const double n = w.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    fail(ErrorCode::ZeroVector, "C^{-1/2} v vanished");
  return w / n;
}

std::string estimator_name(const Estimator &estimator) {
  struct Name {
    std::string operator()(const ExactDiscrete &) const {
      return "exact-discrete";
    }
    std::string operator()(const SphereQuadrature &) const {
      return "sphere-quadrature";
    }
    std::string operator()(const RadialIntegral &) const {
      return "radial-integral";
    }
    std::string operator()(const MonteCarlo &) const { return "monte-carlo"; }
  };
  return std::visit(Name{}, estimator);
}

namespace {

Matrix exact_discrete(const DirectionLaw &law, const Matrix &map) {
  if (!law.is_discrete())
    fail(ErrorCode::UnsupportedEstimator,
         "exact-discrete needs a discrete direction law");
  Matrix m = Matrix::Zero(map.rows(), map.rows());
  const auto atoms = law.atoms();
  const auto weights = law.weights();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (weights[i] == 0.0)
      continue;
    const Vector g = map * atoms[i];
    const double n2 = g.squaredNorm();
    if (!(n2 > 0.0))
      fail(ErrorCode::ZeroVector, "a support direction is mapped to zero");
    m.noalias() += (weights[i] / n2) * g * g.transpose();
  }
  return m;
}

Matrix sphere_2d(const Matrix &map, const SphereQuadrature &q) {
  auto sweep = [&map](std::size_t n, double offset) {
    Matrix sum = Matrix::Zero(map.rows(), map.rows());
    for (std::size_t k = 0; k < n; ++k) {
      const double a = two_pi * (static_cast<double>(k) + offset) /
                       static_cast<double>(n);
      const Vector g = map.col(0) * std::cos(a) + map.col(1) * std::sin(a);
      sum.noalias() += g * g.transpose() / g.squaredNorm();
    }
    return sum;
  };

  auto n = static_cast<std::size_t>(std::max(q.nodes_2d, 4));
  Matrix current = sweep(n, 0.0) / static_cast<double>(n);
  constexpr std::size_t max_nodes = std::size_t{1} << 24;
  while (n < max_nodes) {
    const Matrix refined =
        0.5 * current + sweep(n, 0.5) / (2.0 * static_cast<double>(n));
    n *= 2;
    const double change = (refined - current).cwiseAbs().maxCoeff();
    current = refined;
    if (change < q.tolerance)
      break;
  }
  return current;
}

Matrix sphere_3d(const Matrix &map, const SphereQuadrature &q) {
  // Frame aligned with the eigenvectors of F^T F; the polar axis is the
  // direction F stretches most, so the peaks of the integrand sit on the
  // equator or at isolated equatorial points.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(map.transpose() * map);
  const Matrix frame = solver.eigenvectors();
  const Matrix f = map * frame;

  using Mat = Matrix;
  auto inner = [&](double u) {
    const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
    auto h = [&](double phi) {
      const Vector g = f.col(0) * (s * std::cos(phi)) +
                       f.col(1) * (s * std::sin(phi)) + f.col(2) * u;
      return Mat(g * g.transpose() / g.squaredNorm());
    };
    const auto r = quad::integrate(h, 0.0, two_pi, std::numbers::pi *
                                                        q.tolerance,
                                   0.0, 20000, 32);
    return r.value;
  };
  const auto outer =
      quad::integrate(inner, -1.0, 1.0, two_pi * q.tolerance, 0.0, 20000, 32);
  return outer.value / (4.0 * std::numbers::pi);
}

Matrix radial_integral(const Matrix &map, const RadialIntegral &q) {
  const Eigen::Index m = map.rows();
  if (m == 1)
    return Matrix::Ones(1, 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(map * map.transpose());
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::NumericalFailure, "eigendecomposition of F F^T failed");
  Vector s = solver.eigenvalues().cwiseMax(0.0);
  const double s_max = s.maxCoeff();
  if (!(s_max > 0.0))
    fail(ErrorCode::ZeroVector, "map is identically zero");
  double s_min = s_max;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (s(j) <= 1e-300)
      s(j) = 0.0;
    else
      s_min = std::min(s_min, s(j));
  }

  const double lo = std::log(1e-16 / s_max);
  const double hi = std::log(1e16 / s_min);
  Vector diag(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (s(i) == 0.0) {
      diag(i) = 0.0;
      continue;
    }
    auto f = [&](double u) {
      const double t = std::exp(u);
      double log_prod = 0.0;
      for (Eigen::Index j = 0; j < m; ++j)
        log_prod -= 0.5 * std::log1p(2.0 * t * s(j));
      return t * s(i) / (1.0 + 2.0 * t * s(i)) * std::exp(log_prod);
    };
    const auto r = quad::integrate(f, lo, hi, q.tolerance, 0.0, 4000, 16);
    diag(i) = r.value;
  }
  const Matrix &u = solver.eigenvectors();
  return u * diag.asDiagonal() * u.transpose();
}

struct McResult {
  Matrix mean;
  std::vector<Matrix> batches;
};

McResult monte_carlo(const DirectionLaw &law, const Matrix &map,
                     const MonteCarlo &mc, bool diagonal_only) {
  if (mc.samples == 0 || mc.batches < 1)
    fail(ErrorCode::BadInputs, "monte-carlo needs samples and batches >= 1");
  const auto n_batches = static_cast<std::size_t>(mc.batches);
  if (mc.samples < n_batches)
    fail(ErrorCode::BadInputs, "monte-carlo needs at least one sample per batch");
  const Eigen::Index m = map.rows();
  const Eigen::Index d = map.cols();
  const bool diagonal_map = diagonal_only && m == d && map.isDiagonal(0.0);
  const Vector map_diag = map.diagonal();

  std::vector<Matrix> batch_mean(n_batches);
  std::vector<std::size_t> batch_n(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b)
    batch_n[b] = mc.samples / n_batches + (b < mc.samples % n_batches ? 1 : 0);

  for_each_block(n_batches, mc.parallel, [&](std::size_t b) {
    Rng rng(derive_seed(mc.seed, b));
    Matrix sum = Matrix::Zero(m, m);
    Vector diag_sum = Vector::Zero(m);
    Vector v(d), g(m);
    for (std::size_t k = 0; k < batch_n[b]; ++k) {
      if (law.is_discrete()) {
        v = law.atoms()[law.atom_index(rng.uniform())];
      } else {
        for (Eigen::Index i = 0; i < d; ++i)
          v(i) = rng.normal();
      }
      if (diagonal_map)
        g = map_diag.cwiseProduct(v);
      else
        g.noalias() = map * v;
      const double n2 = g.squaredNorm();
      if (!(n2 > 0.0))
        continue; // measure-zero draw
      if (diagonal_only)
        diag_sum += g.cwiseAbs2() / n2;
      else
        sum.selfadjointView<Eigen::Lower>().rankUpdate(g, 1.0 / n2);
    }
    const double inv = 1.0 / static_cast<double>(batch_n[b]);
    if (diagonal_only) {
      batch_mean[b] = Matrix(diag_sum.asDiagonal()) * inv;
    } else {
      Matrix full = sum.selfadjointView<Eigen::Lower>();
      batch_mean[b] = full * inv;
    }
  });

  McResult out;
  out.mean = Matrix::Zero(m, m);
  for (std::size_t b = 0; b < n_batches; ++b)
    out.mean += batch_mean[b] * (static_cast<double>(batch_n[b]) /
                                 static_cast<double>(mc.samples));
  out.batches = std::move(batch_mean);
  return out;
}

SecondMoment dispatch(const DirectionLaw &law, const Matrix &map,
                      const Estimator &estimator, bool diagonal_only) {
  if (map.cols() != law.dim())
    fail(ErrorCode::DimensionMismatch,
         "map has " + std::to_string(map.cols()) + " columns, law dimension " +
             std::to_string(law.dim()));
  SecondMoment out;
  if (std::holds_alternative<ExactDiscrete>(estimator)) {
    out.matrix = exact_discrete(law, map);
  } else if (const auto *q = std::get_if<SphereQuadrature>(&estimator)) {
    if (law.is_discrete())
      fail(ErrorCode::UnsupportedEstimator,
           "sphere-quadrature needs the uniform law");
    if (law.dim() == 2)
      out.matrix = sphere_2d(map, *q);
    else if (law.dim() == 3)
      out.matrix = sphere_3d(map, *q);
    else
      fail(ErrorCode::UnsupportedEstimator,
           "sphere-quadrature supports d = 2 and d = 3 only");
  } else if (const auto *r = std::get_if<RadialIntegral>(&estimator)) {
    if (law.is_discrete())
      fail(ErrorCode::UnsupportedEstimator,
           "radial-integral needs the uniform law");
    out.matrix = radial_integral(map, *r);
  } else {
    McResult mc = monte_carlo(law, map, std::get<MonteCarlo>(estimator),
                              diagonal_only);
    out.matrix = std::move(mc.mean);
    out.batches = std::move(mc.batches);
  }
  return out;
}

} // namespace

SecondMoment second_moment_of_map(const DirectionLaw &law, const Matrix &map,
                                  const Estimator &estimator) {
  return dispatch(law, map, estimator, false);
}

SecondMoment second_moment(const DirectionLaw &law, const CovarianceSpec &c,
                           const Estimator &estimator) {
  if (c.dim() != law.dim())
    fail(ErrorCode::DimensionMismatch,
         "covariance and direction law differ in dimension");
  const bool diagonal_only = c.is_diagonal() && !law.is_discrete();
  Matrix map = c.is_diagonal()
                   ? Matrix(c.eigenvalues().array().rsqrt().matrix().asDiagonal())
                   : c.inv_sqrt_matrix();
  return dispatch(law, map, estimator, diagonal_only);
}

Matrix second_moment_matrix(const DirectionLaw &law, const CovarianceSpec &c,
                            const Estimator &estimator) {
  return second_moment(law, c, estimator).matrix;
}

Estimator default_estimator(const DirectionLaw &law) {
  if (law.is_discrete())
    return ExactDiscrete{};
  if (law.dim() == 2 || law.dim() == 3)
    return SphereQuadrature{};
  return MonteCarlo{};
}

} // namespace hitrun
