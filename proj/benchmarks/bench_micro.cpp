// Microbenchmarks for the hot paths: Gaussian draws, per-step noise
// generation, Chen composition, and single scheme steps. Run via the
// srk_micro target when google-benchmark is available.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "srk/rng.hpp"
#include "srk/solver.hpp"
#include "srk/testeqs.hpp"
#include "srk/wiener.hpp"

namespace {

using namespace srk;

void BM_NormalDraw(benchmark::State& state) {
  RngStream rng(0x9eedu);
  double acc = 0.0;
  for (auto _ : state) acc += rng.normal();
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_NormalDraw);

void BM_SampleIncrements(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const double h = std::ldexp(1.0, -6);
  RngStream rng(0x9eedu);
  for (auto _ : state) {
    auto w = sample_increments(rng, m, h);
    benchmark::DoNotOptimize(w.dw.data());
  }
}
BENCHMARK(BM_SampleIncrements)->Arg(2)->Arg(4)->Arg(10);

// Cost scales with the auxiliary budget rho(m, h), so both the dimension and
// the step size matter.
void BM_ApproxIterated(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const double h = std::ldexp(1.0, -static_cast<int>(state.range(1)));
  RngStream rng(0x9eedu);
  const auto w = sample_increments(rng, m, h);
  for (auto _ : state) {
    auto iter = approx_iterated(rng, w, Calculus::ito);
    benchmark::DoNotOptimize(iter.values.data());
  }
}
BENCHMARK(BM_ApproxIterated)
    ->Args({2, 6})
    ->Args({4, 6})
    ->Args({4, 12})
    ->Args({10, 6});

void BM_OracleIterated(benchmark::State& state) {
  const std::int64_t subdivisions = state.range(0);
  const double h = 0.25;
  RngStream rng(0x9eedu);
  for (auto _ : state) {
    auto step = oracle_iterated(rng, 2, h, subdivisions);
    benchmark::DoNotOptimize(step.iter.values.data());
  }
}
BENCHMARK(BM_OracleIterated)->Arg(64)->Arg(1024);

void BM_Compose(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const double h = std::ldexp(1.0, -6);
  RngStream rng(0x9eedu);
  const auto wa = sample_increments(rng, m, h);
  const auto wb = sample_increments(rng, m, h);
  const PathStep a{wa, approx_iterated(rng, wa, Calculus::ito)};
  const PathStep b{wb, approx_iterated(rng, wb, Calculus::ito)};
  for (auto _ : state) {
    auto c = compose(a, b);
    benchmark::DoNotOptimize(c.iter.values.data());
  }
}
BENCHMARK(BM_Compose)->Arg(2)->Arg(4);

void step_bench(benchmark::State& state, const char* scheme_name, int d) {
  const auto scheme = make_scheme(scheme_name);
  const auto p = eq4(d);
  const double h = std::ldexp(1.0, -6);
  RngStream rng(0x9eedu);
  const auto w = sample_increments(rng, p.m, h);
  const auto iter = approx_iterated(rng, w, Calculus::ito);
  const StepContext ctx{0.0, h, &w, &iter};
  std::vector<double> out(p.d, 0.0);
  for (auto _ : state) {
    scheme_step(scheme, p, ctx, p.x0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_EmStep(benchmark::State& state) {
  step_bench(state, "EM", static_cast<int>(state.range(0)));
}
BENCHMARK(BM_EmStep)->Arg(2)->Arg(4);

void BM_MilsteinStep(benchmark::State& state) {
  step_bench(state, "MIL", static_cast<int>(state.range(0)));
}
BENCHMARK(BM_MilsteinStep)->Arg(2)->Arg(4);

void BM_SrkStep(benchmark::State& state) {
  step_bench(state, "SRI2s1", static_cast<int>(state.range(0)));
}
BENCHMARK(BM_SrkStep)->Arg(2)->Arg(4);

// End to end: one path of the scalar closed-form problem, noise included.
void BM_IntegratePath(benchmark::State& state) {
  const auto scheme = make_scheme("SRI2s1");
  const auto p = eq1();
  const std::int64_t n = 64;
  const double h = (p.T - p.t0) / static_cast<double>(n);
  std::uint64_t path = 0;
  for (auto _ : state) {
    FreshPathSource source(0x9eedu, path++, 6, p.m, h);
    auto traj = integrate(scheme, p, n, source);
    benchmark::DoNotOptimize(traj.terminal().data());
  }
}
BENCHMARK(BM_IntegratePath);

}  // namespace

BENCHMARK_MAIN();
