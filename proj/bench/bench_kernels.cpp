// Serial reference against the OpenMP kernels on the three replica
// ensembles. Arguments: replicas (or samples), then worker count for the
// parallel variants.

#include "hitrun/coupling.hpp"
#include "hitrun/directions.hpp"
#include "hitrun/kaczmarz.hpp"
#include "hitrun/reference.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace hitrun;

const CovarianceSpec &cov() {
  static const CovarianceSpec c = [] {
    Matrix m(3, 3);
    m << 3, 0.5, 0, 0.5, 2, 0.3, 0, 0.3, 1;
    return build_covariance(m);
  }();
  return c;
}

const Vector a0 = (Vector(3) << 2, -1, 0.5).finished();
const Vector b0 = (Vector(3) << -1, 0, 1).finished();

ParallelOptions workers(const benchmark::State &state) {
  ParallelOptions p;
  p.workers = static_cast<int>(state.range(1));
  return p;
}

void contraction_reference(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::contraction_experiment(
        cov(), DirectionLaw::uniform(3), a0, b0, 50, n, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 50);
}

void contraction_parallel(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ContractionOptions opts;
  opts.parallel = workers(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(contraction_experiment(
        cov(), DirectionLaw::uniform(3), a0, b0, 50, n, 1, opts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 50);
}

const KaczmarzProblem &problem() {
  static const KaczmarzProblem p =
      build_problem(example_matrix(0.1), Vector::Zero(2));
  return p;
}

void kaczmarz_reference(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Vector x0 = (Vector(2) << -10, 0).finished();
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::kaczmarz_ensemble(
        problem(), DirectionLaw::uniform(2), x0, 200, n, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
}

void kaczmarz_parallel(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Vector x0 = (Vector(2) << -10, 0).finished();
  EnsembleOptions opts;
  opts.parallel = workers(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(kaczmarz_ensemble(
        problem(), DirectionLaw::uniform(2), x0, 200, n, 1, opts));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
}

const Matrix map = cov().inv_sqrt_matrix();

void moment_reference(benchmark::State &state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::monte_carlo_second_moment(
        DirectionLaw::uniform(3), map, n, 1, 20));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void moment_parallel(benchmark::State &state) {
  MonteCarlo mc;
  mc.samples = static_cast<std::size_t>(state.range(0));
  mc.parallel = workers(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        second_moment_of_map(DirectionLaw::uniform(3), map, mc));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(contraction_reference)->Args({10000, 1})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(contraction_parallel)->Args({10000, 1})->Args({10000, 2})->Args({10000, 4})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(kaczmarz_reference)->Args({10000, 1})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(kaczmarz_parallel)->Args({10000, 1})->Args({10000, 2})->Args({10000, 4})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(moment_reference)->Args({1000000, 1})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(moment_parallel)->Args({1000000, 1})->Args({1000000, 2})->Args({1000000, 4})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
