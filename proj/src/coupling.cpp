#include "hitrun/coupling.hpp"

#include "hitrun/errors.hpp"
#include "hitrun/hit_and_run.hpp"

#include <cassert>
#include <cmath>

namespace hitrun {

CoupledPair make_coupled_pair(const CovarianceSpec &c, const Vector &a,
                              const Vector &b) {
  require_dim(a, c.dim(), "position a");
  require_dim(b, c.dim(), "position b");
  CoupledPair pair{a, b, c.apply_inv_sqrt(a - b), 0, 0.0};
  pair.natural_gap = pair.natural_difference.norm();
  return pair;
}

Vector project_orthogonal(const Vector &z, const Vector &w) {
  if (z.size() != w.size())
    fail(ErrorCode::DimensionMismatch, "projection operands differ in size");
  const double w2 = w.squaredNorm();
  if (!(w2 > 0.0))
    fail(ErrorCode::ZeroDirection, "cannot project onto the complement of 0");
  return z - (z.dot(w) / w2) * w;
}

CoupledPair coupled_step(const CovarianceSpec &c, const DirectionLaw &law,
                         const CoupledPair &pair, Rng &rng) {
  const Vector v = sample_direction(law, rng);
  const double z = rng.normal();
  const Vector w = pushforward_direction(c, v);

  CoupledPair next;
  next.position_a = transition(c, pair.position_a, v, z);
  next.position_b = transition(c, pair.position_b, v, z);
  next.natural_difference = pair.natural_difference;
  next.natural_difference -= next.natural_difference.dot(w) * w;
  next.natural_gap = next.natural_difference.norm();
  next.step_count = pair.step_count + 1;
#ifndef NDEBUG
  const Vector diff = c.apply_inv_sqrt(next.position_a - next.position_b);
  const double scale = 1.0 + natural_norm(c, next.position_a) +
                       natural_norm(c, next.position_b);
  assert((diff - next.natural_difference).norm() <= 1e-10 * scale);
#endif
  return next;
}

ContractionResult contraction_experiment(const CovarianceSpec &c,
                                         const DirectionLaw &law,
                                         const Vector &a0, const Vector &b0,
                                         std::size_t n_steps,
                                         std::size_t n_replicas,
                                         std::uint64_t seed,
                                         const ContractionOptions &options) {
  if (n_replicas < 2)
    fail(ErrorCode::InsufficientReplicas, "contraction needs >= 2 replicas");
  if (n_steps < 1)
    fail(ErrorCode::BadInputs, "contraction needs at least one step");
  if (law.dim() != c.dim())
    fail(ErrorCode::DimensionMismatch,
         "covariance and direction law differ in dimension");
  require_dim(a0, c.dim(), "a0");
  require_dim(b0, c.dim(), "b0");

  const std::size_t len = n_steps + 1;
  const Vector delta0 = c.apply_inv_sqrt(a0 - b0);
  const std::size_t bs = std::max<std::size_t>(options.parallel.block_size, 1);
  const std::size_t n_blocks = block_count(n_replicas, bs);

  struct Block {
    std::vector<double> sq, sq2, gap;
  };
  std::vector<Block> blocks(n_blocks);

  for_each_block(n_blocks, options.parallel, [&](std::size_t blk) {
    Block &acc = blocks[blk];
    acc.sq.assign(len, 0.0);
    acc.sq2.assign(len, 0.0);
    acc.gap.assign(len, 0.0);
    const std::size_t first = blk * bs;
    const std::size_t last = std::min(first + bs, n_replicas);
    Vector delta(delta0.size()), v, w;
    for (std::size_t r = first; r < last; ++r) {
      Rng rng(derive_seed(seed, r));
      delta = delta0;
      for (std::size_t k = 0; k < len; ++k) {
        if (k > 0) {
          // Positions do not enter the gap; z is drawn so the stream stays
          // aligned with coupled_step.
          sample_direction_into(law, rng, v);
          (void)rng.normal();
          w = pushforward_direction(c, v);
          delta -= delta.dot(w) * w;
        }
        const double g2 = delta.squaredNorm();
        acc.sq[k] += g2;
        acc.sq2[k] += g2 * g2;
        acc.gap[k] += std::sqrt(g2);
      }
    }
  });

  ContractionResult out;
  out.replicas = n_replicas;
  out.mean_sq_gap.assign(len, 0.0);
  out.se.assign(len, 0.0);
  out.mean_gap.assign(len, 0.0);
  std::vector<double> sq2(len, 0.0);
  for (const Block &b : blocks) {
    for (std::size_t k = 0; k < len; ++k) {
      out.mean_sq_gap[k] += b.sq[k];
      sq2[k] += b.sq2[k];
      out.mean_gap[k] += b.gap[k];
    }
  }
  const double n = static_cast<double>(n_replicas);
  for (std::size_t k = 0; k < len; ++k) {
    out.mean_sq_gap[k] /= n;
    out.mean_gap[k] /= n;
    const double var = std::max(
        0.0, (sq2[k] / n - out.mean_sq_gap[k] * out.mean_sq_gap[k]) * n /
                 (n - 1.0));
    out.se[k] = std::sqrt(var / n);
  }

  const std::size_t begin = options.window_begin >= 0
                                ? static_cast<std::size_t>(options.window_begin)
                                : n_steps / 5;
  const std::size_t end = options.window_end >= 0
                              ? static_cast<std::size_t>(options.window_end)
                              : len;
  out.fit = fit_log_decay(out.mean_sq_gap, begin, end);
  out.coalesced = out.fit.coalesced;
  return out;
}

} // namespace hitrun
