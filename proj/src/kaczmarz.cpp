#include "hitrun/kaczmarz.hpp"

#include "hitrun/errors.hpp"
#include "hitrun/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace hitrun {

KaczmarzProblem build_problem(const Matrix &a, const Vector &b) {
  if (a.rows() == 0 || a.cols() == 0)
    fail(ErrorCode::DimensionZero, "system matrix is empty");
  if (a.rows() < a.cols())
    fail(ErrorCode::BadDimensions, "system must have d >= m");
  if (b.size() != a.rows())
    fail(ErrorCode::DimensionMismatch, "right-hand side length differs from d");
  if (!a.allFinite() || !b.allFinite())
    fail(ErrorCode::BadInputs, "system has non-finite entries");

  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector &s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-10 * s(0)))
    fail(ErrorCode::RankDeficient, "matrix does not have full column rank");

  KaczmarzProblem p;
  p.a = a;
  p.b = b;
  p.x_star = svd.solve(b);
  p.frobenius_sq = a.squaredNorm();
  const double residual = (a * p.x_star - b).norm();
  if (residual > 1e-8 * (1.0 + b.norm()))
    fail(ErrorCode::Inconsistent,
         "system has no exact solution (residual " + std::to_string(residual) +
             ")");
  return p;
}

Matrix example_matrix(double a) {
  Matrix m(2, 2);
  m << 0.0, 1.0, a, 1.0;
  return m;
}

namespace {

/// Workspace for allocation-free projections.
struct Projector {
  const KaczmarzProblem &problem;
  const DirectionLaw &law;
  double threshold;
  bool rows;
  Vector v, g;

  Projector(const KaczmarzProblem &p, const DirectionLaw &l)
      : problem(p), law(l), threshold(1e-14 * std::sqrt(p.frobenius_sq)),
        rows(l.kind() == DirectionLaw::Kind::row_weighted),
        v(p.a.rows()), g(p.a.cols()) {
    if (l.dim() != p.a.rows())
      fail(ErrorCode::DimensionMismatch,
           "direction law dimension differs from the number of equations");
  }

  void apply(Vector &x, Rng &rng) {
    double vb = 0.0;
    double n2 = 0.0;
    for (int attempt = 0;; ++attempt) {
      if (rows) {
        const std::size_t i = law.atom_index(rng.uniform());
        const auto row = static_cast<Eigen::Index>(i);
        g = problem.a.row(row).transpose();
        vb = problem.b(row);
      } else {
        sample_direction_into(law, rng, v);
        g.noalias() = problem.a.transpose() * v;
        vb = v.dot(problem.b);
      }
      n2 = g.squaredNorm();
      if (std::sqrt(n2) >= threshold)
        break;
      if (law.is_discrete() || attempt >= 100)
        fail(ErrorCode::DegenerateDirection, "|A^T v| vanished");
    }
    x -= ((g.dot(x) - vb) / n2) * g;
  }
};

} // namespace

std::vector<std::uint64_t> record_grid(std::uint64_t n, std::size_t points) {
  std::vector<std::uint64_t> grid;
  if (points < 2 || n + 1 <= points) {
    for (std::uint64_t k = 0; k <= n; ++k)
      grid.push_back(k);
    return grid;
  }
  for (std::size_t j = 0; j < points; ++j) {
    const auto k = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(n) * static_cast<double>(j) /
                     static_cast<double>(points - 1)));
    if (grid.empty() || k != grid.back())
      grid.push_back(k);
  }
  return grid;
}

Vector kaczmarz_step(const KaczmarzProblem &problem, const DirectionLaw &law,
                     const Vector &x, Rng &rng) {
  require_dim(x, problem.a.cols(), "iterate");
  Projector proj(problem, law);
  Vector out = x;
  proj.apply(out, rng);
  return out;
}

RateReport rate_classical(const Matrix &a) {
  const double f2 = a.squaredNorm();
  if (!(f2 > 0.0))
    fail(ErrorCode::BadInputs, "matrix is zero");
  RateReport r = rate_from_second_moment(a.transpose() * a / f2, "eigen-exact");
  r.label = "classical";
  return r;
}

double rate_classical_lower_bound(const Matrix &a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector &s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return 0.5 * smin * smin / a.squaredNorm();
}

RateReport rate_general(const Matrix &a, const DirectionLaw &law,
                        const Estimator &estimator) {
  const SecondMoment m = second_moment_of_map(law, a.transpose(), estimator);
  RateReport r = rate_from_second_moment(m.matrix, rate_method(estimator),
                                         m.batches);
  r.label = law.describe();
  return r;
}

RateReport rate_general(const Matrix &a, const DirectionLaw &law) {
  return rate_general(a, law, default_estimator(law));
}

KaczmarzTrace solve(const KaczmarzProblem &problem, const DirectionLaw &law,
                    const Vector &x0, std::uint64_t n_iters, Rng &rng) {
  require_dim(x0, problem.a.cols(), "initial iterate");
  Projector proj(problem, law);
  KaczmarzTrace t;
  Vector x = x0;
  t.iterates.push_back(x);
  t.errors.push_back((x - problem.x_star).norm());
  for (std::uint64_t k = 0; k < n_iters; ++k) {
    proj.apply(x, rng);
    t.iterates.push_back(x);
    t.errors.push_back((x - problem.x_star).norm());
  }
  return t;
}

std::string to_string(KaczmarzVariant variant) {
  return variant == KaczmarzVariant::classical ? "classical" : "free";
}

DirectionLaw variant_law(const Matrix &a, KaczmarzVariant variant) {
  if (variant == KaczmarzVariant::classical)
    return DirectionLaw::rows(a);
  return DirectionLaw::uniform(static_cast<int>(a.rows()));
}

KaczmarzCurve kaczmarz_ensemble(const KaczmarzProblem &problem,
                                const DirectionLaw &law, const Vector &x0,
                                std::uint64_t n_iters, std::size_t replicas,
                                std::uint64_t seed,
                                const EnsembleOptions &options) {
  require_dim(x0, problem.a.cols(), "initial iterate");
  if (replicas < 2)
    fail(ErrorCode::InsufficientReplicas, "ensemble needs >= 2 replicas");

  KaczmarzCurve curve;
  curve.iters = record_grid(n_iters, options.record_points);
  curve.replicas = replicas;
  const std::size_t len = curve.iters.size();
  const std::size_t bs = std::max<std::size_t>(options.parallel.block_size, 1);
  const std::size_t n_blocks = block_count(replicas, bs);

  struct Block {
    std::vector<double> err, sq, sq2;
  };
  std::vector<Block> blocks(n_blocks);

  for_each_block(n_blocks, options.parallel, [&](std::size_t blk) {
    Block &acc = blocks[blk];
    acc.err.assign(len, 0.0);
    acc.sq.assign(len, 0.0);
    acc.sq2.assign(len, 0.0);
    Projector proj(problem, law);
    Vector x(x0.size());
    const std::size_t last = std::min(replicas, (blk + 1) * bs);
    for (std::size_t r = blk * bs; r < last; ++r) {
      Rng rng(derive_seed(seed, r));
      x = x0;
      std::size_t next = 0;
      for (std::uint64_t k = 0;; ++k) {
        if (k == curve.iters[next]) {
          const double e2 = (x - problem.x_star).squaredNorm();
          acc.err[next] += std::sqrt(e2);
          acc.sq[next] += e2;
          acc.sq2[next] += e2 * e2;
          if (++next == len)
            break;
        }
        proj.apply(x, rng);
      }
    }
  });

  curve.mean_error.assign(len, 0.0);
  curve.mean_sq_error.assign(len, 0.0);
  curve.se.assign(len, 0.0);
  std::vector<double> sq2(len, 0.0);
  for (const Block &b : blocks) {
    for (std::size_t i = 0; i < len; ++i) {
      curve.mean_error[i] += b.err[i];
      curve.mean_sq_error[i] += b.sq[i];
      sq2[i] += b.sq2[i];
    }
  }
  const double n = static_cast<double>(replicas);
  for (std::size_t i = 0; i < len; ++i) {
    curve.mean_error[i] /= n;
    curve.mean_sq_error[i] /= n;
    const double var = std::max(
        0.0, (sq2[i] / n - curve.mean_sq_error[i] * curve.mean_sq_error[i]) *
                 n / (n - 1.0));
    curve.se[i] = std::sqrt(var / n);
  }

  std::vector<double> k(len);
  std::size_t begin = len;
  const double from = options.fit_from * static_cast<double>(n_iters);
  for (std::size_t i = 0; i < len; ++i) {
    k[i] = static_cast<double>(curve.iters[i]);
    if (begin == len && k[i] >= from)
      begin = i;
  }
  curve.fit = fit_log_decay(k, curve.mean_sq_error, begin, len);
  return curve;
}

ConvergenceResult convergence_experiment(double a, KaczmarzVariant variant,
                                         std::size_t replicas,
                                         std::uint64_t n_iters,
                                         std::uint64_t seed,
                                         const EnsembleOptions &options) {
  if (!(a > 0.0 && a < 1.0))
    fail(ErrorCode::BadA, "a must lie in (0, 1)");
  const Matrix m = example_matrix(a);
  const KaczmarzProblem problem = build_problem(m, Vector::Zero(2));
  const DirectionLaw law = variant_law(m, variant);

  ConvergenceResult out;
  out.a = a;
  out.variant = variant;
  out.rate = variant == KaczmarzVariant::classical
                 ? rate_classical(m)
                 : rate_general(m, law, SphereQuadrature{});
  out.iters = n_iters > 0
                  ? n_iters
                  : static_cast<std::uint64_t>(std::ceil(6.0 / out.rate.rho));
  Vector x0(2);
  x0 << -10.0, 0.0;
  out.curve = kaczmarz_ensemble(problem, law, x0, out.iters, replicas, seed,
                                options);
  out.decay = out.curve.fit.rate();
  return out;
}

} // namespace hitrun
