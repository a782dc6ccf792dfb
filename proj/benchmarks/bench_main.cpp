#include <benchmark/benchmark.h>

#include "dflow/contflow.hpp"
#include "dflow/oracle.hpp"
#include "dflow/pipeline.hpp"
#include "dflow/random.hpp"
#include "dflow/routing.hpp"

using namespace dflow;

static void BM_RouteRectangle(benchmark::State& st) {
  const Tiling t(2, static_cast<int>(st.range(0)));
  CounterRng rng(1);
  const Permutation p = random_permutation(t, rng);
  const Box whole = Box::whole(t);
  for (auto _ : st) benchmark::DoNotOptimize(route_rectangle(whole, p));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_RouteRectangle)->RangeMultiplier(2)->Range(8, 64)->Complexity();

static void BM_ColorCube(benchmark::State& st) {
  const int s = static_cast<int>(st.range(0));
  const Tiling t(2, s);
  const Box k = Box::whole(t);
  CounterRng rng(2);
  std::vector<int> a(k.volume(), 0), b(k.volume(), 0);
  for (std::size_t i = 0; i < a.size() / 3; ++i) a[i] = b[i] = 1;
  for (std::size_t i = a.size(); i > 1; --i) {
    std::swap(a[i - 1], a[rng.below(i)]);
    std::swap(b[i - 1], b[rng.below(i)]);
  }
  const Coloring from(t, k, a), to(t, k, b);
  for (auto _ : st) benchmark::DoNotOptimize(color_cube_flow(k, from, to));
}
BENCHMARK(BM_ColorCube)->RangeMultiplier(2)->Range(4, 32);

static void BM_Connect(benchmark::State& st) {
  const Tiling t(2, static_cast<int>(st.range(0)));
  const Permutation p = random_near_identity(t, 0.05, 7);
  for (auto _ : st) benchmark::DoNotOptimize(connect_to_identity(p));
}
BENCHMARK(BM_Connect)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_OracleRow(benchmark::State& st) {
  const Tiling t(2, 4);
  OracleLimits lim;
  lim.region = Box({0, 0}, {0, 3});
  const auto perms = region_permutations(t, *lim.region);
  for (auto _ : st) benchmark::DoNotOptimize(equivalence_report(t, perms, lim));
}
BENCHMARK(BM_OracleRow)->Unit(benchmark::kMillisecond);

static void BM_FieldTime1Map(benchmark::State& st) {
  const FrameParams fp = make_frame(8, static_cast<int>(st.range(0)));
  const PiecewiseField f = build_swap_field(fp);
  for (auto _ : st) benchmark::DoNotOptimize(integrate_time1_map(f, {fp.side() / 3, fp.side() / 2}, 1e-4));
}
BENCHMARK(BM_FieldTime1Map)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
