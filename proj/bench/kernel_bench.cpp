// Serial reference vs OpenMP path for the data-parallel kernels.
// Arg 0 = serial, 1 = parallel.
#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "massive/attractor_lab.hpp"
#include "massive/kernels.hpp"

using namespace massive;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

const SkewSystem& fast_skew() {
  static const SkewSystem s{make_arc_pair(3), build_fiber_arc(preset_fiber_params(Preset::fast))};
  return s;
}

void BM_certify(benchmark::State& st) {
  // Unit square under a mosaic of small tilted squares: every accepted cell
  // must fit inside one tile, so the subdivision goes several levels deep.
  const Parallelotope target = Parallelotope::box(Vec::Zero(2), Vec::Ones(2));
  Mat tilt(2, 2);
  tilt << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
  RegionUnion tiles;
  for (int i = -5; i <= 5; ++i) {
    for (int j = -5; j <= 5; ++j) {
      Vec c(2);
      c << 0.22 * i, 0.22 * j;
      tiles.add(Parallelotope(AffineMap{0.17 * tilt, c}));
    }
  }
  for (auto _ : st) benchmark::DoNotOptimize(certify_covered(target, tiles, 0.0, 16, exec_of(st)));
  st.counters["cells"] = certify_covered(target, tiles, 0.0, 16, Exec::serial).cells_examined;
}

void BM_covering_radius(benchmark::State& st) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> pts(1 << 16), qs(1 << 12);
  for (auto& p : pts) p = Vec::Constant(2, 0.0).unaryExpr([&](double) { return u(rng); });
  for (auto& q : qs) q = Vec::Constant(2, 0.0).unaryExpr([&](double) { return u(rng); });
  for (auto _ : st) benchmark::DoNotOptimize(covering_radius(qs, pts, exec_of(st)));
}

void BM_occupancy(benchmark::State& st) {
  OccupancyParams p;
  p.n_starts = 16;
  p.steps = 20000;
  p.burn_in = 100;
  for (auto _ : st) benchmark::DoNotOptimize(occupancy_run(fast_skew(), p, exec_of(st)));
}

void BM_density(benchmark::State& st) {
  for (auto _ : st) {
    benchmark::DoNotOptimize(density_certificate(fast_skew(), 0.37, 14, Vec::Zero(1), 256, 1, exec_of(st)));
  }
}

void BM_fiber_report(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(verify_fiber_arc(fast_skew().arc, 0.25, 20, exec_of(st)));
}

}  // namespace

BENCHMARK(BM_certify)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_covering_radius)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_occupancy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_density)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fiber_report)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
