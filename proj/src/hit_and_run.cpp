#include "hitrun/hit_and_run.hpp"

#include "hitrun/errors.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace hitrun {

Displacement displacement_law(const CovarianceSpec &c, const Vector &x,
                              const Vector &v) {
  require_dim(x, c.dim(), "position");
  require_dim(v, c.dim(), "direction");
  const Vector cinv_v = c.apply_inv(v);
  const double q = v.dot(cinv_v);
  if (!(q > 0.0))
    fail(ErrorCode::ZeroVector, "direction has zero natural length");
  return {-x.dot(cinv_v) / q, 1.0 / q};
}

Vector transition(const CovarianceSpec &c, const Vector &x, const Vector &v,
                  double z) {
  require_dim(x, c.dim(), "position");
  const Vector w = pushforward_direction(c, v);
  Vector nat = c.apply_inv_sqrt(x);
  nat += (z - nat.dot(w)) * w;
  return c.apply_sqrt(nat);
}

Vector transition_direct(const CovarianceSpec &c, const Vector &x,
                         const Vector &v, double z) {
  const Displacement h = displacement_law(c, x, v);
  return x + (h.mean + std::sqrt(h.variance) * z) * v;
}

ChainState step(const CovarianceSpec &c, const DirectionLaw &law,
                const ChainState &state, Rng &rng) {
  const Vector v = sample_direction(law, rng);
  const double z = rng.normal();
  ChainState next{transition(c, state.position, v, z), state.step_count + 1};
#ifndef NDEBUG
  const Vector direct = transition_direct(c, state.position, v, z);
  const double scale =
      1.0 + state.position.norm() + next.position.norm();
  assert((next.position - direct).norm() <= 1e-10 * scale);
#endif
  return next;
}

namespace {

void thin(Trajectory &t) {
  std::size_t keep = 0;
  for (std::size_t i = 0; i < t.positions.size(); i += 2) {
    t.positions[keep] = std::move(t.positions[i]);
    t.stored_steps[keep] = t.stored_steps[i];
    ++keep;
  }
  t.positions.resize(keep);
  t.stored_steps.resize(keep);
  t.stride *= 2;
}

} // namespace

Trajectory run_chain(const CovarianceSpec &c, const DirectionLaw &law,
                     const Vector &x0, std::uint64_t n_steps, Rng &rng,
                     const ChainOptions &options) {
  require_dim(x0, c.dim(), "initial position");
  if (law.dim() != c.dim())
    fail(ErrorCode::DimensionMismatch,
         "covariance and direction law differ in dimension");
  if (!x0.allFinite())
    fail(ErrorCode::BadInputs, "initial position is not finite");

  const Eigen::Index d = c.dim();
  Trajectory t;
  t.natural_norms.reserve(static_cast<std::size_t>(n_steps) + 1);
  t.mean = Vector::Zero(d);
  Matrix m2 = Matrix::Zero(d, d);
  const std::size_t cap = std::max<std::size_t>(options.max_positions, 2);

  ChainState state{x0, 0};
  auto record = [&](const ChainState &s) {
    t.natural_norms.push_back(natural_norm(c, s.position));
    if (s.step_count >= options.burn_in) {
      // Welford update of mean and co-moment.
      ++t.moment_count;
      const Vector delta = s.position - t.mean;
      t.mean += delta / static_cast<double>(t.moment_count);
      m2.noalias() += delta * (s.position - t.mean).transpose();
    }
    if (options.store_positions && s.step_count % t.stride == 0) {
      t.positions.push_back(s.position);
      t.stored_steps.push_back(s.step_count);
      if (t.positions.size() > cap)
        thin(t);
    }
  };

  record(state);
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    state = step(c, law, state, rng);
    record(state);
  }
  t.covariance = t.moment_count > 1
                     ? Matrix(m2 / static_cast<double>(t.moment_count - 1))
                     : Matrix::Zero(d, d);
  t.final_state = std::move(state);
  return t;
}

double transition_log_density(const CovarianceSpec &c, const DirectionLaw &law,
                              const Vector &x, const Vector &y) {
  if (law.kind() != DirectionLaw::Kind::uniform_sphere)
    fail(ErrorCode::UnsupportedLaw,
         "closed-form density exists for the uniform law only");
  if (c.dim() < 2)
    fail(ErrorCode::UnsupportedDimension, "density needs dimension >= 2");
  require_dim(x, c.dim(), "x");
  require_dim(y, c.dim(), "y");
  const Vector delta = y - x;
  const double r = delta.norm();
  if (!(r > 0.0))
    fail(ErrorCode::CoincidentPoints, "density is singular at y = x");

  const double d = static_cast<double>(c.dim());
  const Vector nat_delta = c.apply_inv_sqrt(delta);
  const double s2 = nat_delta.squaredNorm();
  const double cross = c.apply_inv_sqrt(x).dot(nat_delta);
  const double qy = natural_norm(c, y);
  const double qx = natural_norm(c, x);

  const double log_two_over_area =
      std::lgamma(0.5 * d) - 0.5 * d * std::log(std::numbers::pi);
  return log_two_over_area + 0.5 * std::log(s2) -
         0.5 * std::log(2.0 * std::numbers::pi) - d * std::log(r) -
         0.5 * qy * qy + 0.5 * qx * qx - cross * cross / (2.0 * s2);
}

} // namespace hitrun
