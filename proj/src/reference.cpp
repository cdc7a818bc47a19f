#include "hitrun/reference.hpp"

#include "hitrun/errors.hpp"

#include <cmath>

namespace hitrun::reference {

ContractionResult contraction_experiment(const CovarianceSpec &c,
                                         const DirectionLaw &law,
                                         const Vector &a0, const Vector &b0,
                                         std::size_t n_steps,
                                         std::size_t n_replicas,
                                         std::uint64_t seed) {
  if (n_replicas < 2)
    fail(ErrorCode::InsufficientReplicas, "contraction needs >= 2 replicas");
  const std::size_t len = n_steps + 1;
  std::vector<double> sq(len, 0.0), sq2(len, 0.0), gap(len, 0.0);
  for (std::size_t r = 0; r < n_replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    CoupledPair pair = make_coupled_pair(c, a0, b0);
    for (std::size_t k = 0; k < len; ++k) {
      if (k > 0)
        pair = coupled_step(c, law, pair, rng);
      const double g2 = pair.natural_gap * pair.natural_gap;
      sq[k] += g2;
      sq2[k] += g2 * g2;
      gap[k] += pair.natural_gap;
    }
  }
  ContractionResult out;
  out.replicas = n_replicas;
  const double n = static_cast<double>(n_replicas);
  for (std::size_t k = 0; k < len; ++k) {
    const double mean = sq[k] / n;
    out.mean_sq_gap.push_back(mean);
    out.mean_gap.push_back(gap[k] / n);
    const double var = std::max(0.0, (sq2[k] / n - mean * mean) * n / (n - 1.0));
    out.se.push_back(std::sqrt(var / n));
  }
  out.fit = fit_log_decay(out.mean_sq_gap, n_steps / 5, len);
  out.coalesced = out.fit.coalesced;
  return out;
}

KaczmarzCurve kaczmarz_ensemble(const KaczmarzProblem &problem,
                                const DirectionLaw &law, const Vector &x0,
                                std::uint64_t n_iters, std::size_t replicas,
                                std::uint64_t seed,
                                const EnsembleOptions &options) {
  KaczmarzCurve curve;
  curve.iters = record_grid(n_iters, options.record_points);
  const std::size_t len = curve.iters.size();
  std::vector<double> err(len, 0.0), sq(len, 0.0), sq2(len, 0.0);
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, r));
    Vector x = x0;
    std::size_t next = 0;
    for (std::uint64_t k = 0; next < len; ++k) {
      if (k == curve.iters[next]) {
        const double e2 = (x - problem.x_star).squaredNorm();
        err[next] += std::sqrt(e2);
        sq[next] += e2;
        sq2[next] += e2 * e2;
        ++next;
        if (next == len)
          break;
      }
      x = kaczmarz_step(problem, law, x, rng);
    }
  }
  const double n = static_cast<double>(replicas);
  curve.replicas = replicas;
  curve.mean_error.assign(len, 0.0);
  curve.mean_sq_error.assign(len, 0.0);
  curve.se.assign(len, 0.0);
  std::vector<double> k(len);
  std::size_t begin = len;
  for (std::size_t i = 0; i < len; ++i) {
    curve.mean_error[i] = err[i] / n;
    curve.mean_sq_error[i] = sq[i] / n;
    const double var = std::max(
        0.0, (sq2[i] / n - curve.mean_sq_error[i] * curve.mean_sq_error[i]) *
                 n / (n - 1.0));
    curve.se[i] = std::sqrt(var / n);
    k[i] = static_cast<double>(curve.iters[i]);
    if (begin == len && k[i] >= options.fit_from * static_cast<double>(n_iters))
      begin = i;
  }
  curve.fit = fit_log_decay(k, curve.mean_sq_error, begin, len);
  return curve;
}

Matrix monte_carlo_second_moment(const DirectionLaw &law, const Matrix &map,
                                 std::size_t samples, std::uint64_t seed,
                                 int batches) {
  const auto nb = static_cast<std::size_t>(batches);
  Matrix total = Matrix::Zero(map.rows(), map.rows());
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t n = samples / nb + (b < samples % nb ? 1 : 0);
    Rng rng(derive_seed(seed, b));
    Matrix sum = Matrix::Zero(map.rows(), map.rows());
    for (std::size_t k = 0; k < n; ++k) {
      Vector v(law.dim());
      if (law.is_discrete()) {
        v = law.atoms()[law.atom_index(rng.uniform())];
      } else {
        for (Eigen::Index i = 0; i < v.size(); ++i)
          v(i) = rng.normal();
      }
      const Vector g = map * v;
      const double n2 = g.squaredNorm();
      if (n2 > 0.0)
        sum += g * g.transpose() / n2;
    }
    total += (sum / static_cast<double>(n)) *
             (static_cast<double>(n) / static_cast<double>(samples));
  }
  return total;
}

} // namespace hitrun::reference
