#include <benchmark/benchmark.h>

#include <cmath>

#include "ditto/models.hpp"
#include "ditto/normconst.hpp"
#include "ditto/parallel.hpp"
#include "ditto/perfect.hpp"
#include "ditto/rng.hpp"

using namespace ditto;

namespace {

LogDensity standard_normal() {
  return [](const Vector& t) { return -0.5 * t.squaredNorm(); };
}

// Kriging mean on a smooth quadratic design of K points in dimension d.
void BM_GpPredict(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  Rng rng(1, 0);
  DesignSet design;
  design.points = draw_design_points(k, d, 1.0, rng);
  for (const auto& p : design.points) {
    design.values.push_back(p.squaredNorm());
    design.std_errors.push_back(0.0);
  }
  const GpSurrogate s = gp_fit(design, Vector::Ones(d), 1e-8);
  const auto probes = draw_design_points(256, d, 1.0, rng);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s.predict(probes[i++ % probes.size()]));
}
BENCHMARK(BM_GpPredict)->Args({100, 2})->Args({500, 20})->Args({500, 100});

void BM_GpFit(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  Rng rng(2, 0);
  DesignSet design;
  design.points = draw_design_points(k, 2, 1.0, rng);
  for (const auto& p : design.points) {
    design.values.push_back(p.squaredNorm());
    design.std_errors.push_back(0.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(gp_fit(design, Vector::Ones(2), 1e-8));
}
BENCHMARK(BM_GpFit)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

// Monte Carlo min/max bracket of one annulus.
void BM_EstimateRegion(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const EllipsoidalPartition part(Vector::Zero(d), Matrix::Identity(d, d), {2.0, 0.05, 20});
  const LogDensity target = standard_normal();
  std::uint64_t s = 0;
  for (auto _ : state) {
    Rng rng(3, s++);
    benchmark::DoNotOptimize(estimate_region(part, 5, target, 5000, 0.05, rng));
  }
}
BENCHMARK(BM_EstimateRegion)->Arg(2)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ResidualStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const EllipsoidalPartition part(Vector::Zero(d), Matrix::Identity(d, d), {2.0, 0.05, 20});
  const LogDensity target = standard_normal();
  Rng rng(4, 0);
  const RegionEstimate region = estimate_region(part, 5, target, 5000, 0.05, rng);
  ChainState st{sample_uniform_annulus(part, 5, rng), 0.0};
  st.log_density = target(st.theta);
  for (auto _ : state) benchmark::DoNotOptimize(residual_step(st, region, part, target, rng));
}
BENCHMARK(BM_ResidualStep)->Arg(2)->Arg(20);

// Importance-sampling estimate of an Ising log-normalizer.
void BM_IsingImportance(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const IsingModel model(side, side);
  DataGenConfig gen;
  gen.gibbs_sweeps = 1000;
  Rng data_rng(5, 0);
  const Dataset data = model.generate_data(Vector{{0.05, 0.38}}, gen, data_rng);
  std::uint64_t s = 0;
  for (auto _ : state) {
    Rng rng(6, s++);
    benchmark::DoNotOptimize(is_log_normconst(model, data, Vector{{0.05, 0.38}}, 10'000, rng));
  }
}
BENCHMARK(BM_IsingImportance)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

// Scheduling overhead of the worker pool on trivial tasks.
void BM_ParallelMap(benchmark::State& state) {
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(parallel_map(1000, workers, [](std::size_t i) { return std::sqrt(static_cast<double>(i)); }));
  }
}
BENCHMARK(BM_ParallelMap)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
