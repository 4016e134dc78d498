// Parallel kernels against their serial references. Run with
// SPINLAB_THREADS or OMP_NUM_THREADS to vary the team size.
#include <benchmark/benchmark.h>

#include "spinlab/gibbs.hpp"
#include "spinlab/glauber.hpp"
#include "spinlab/graphs.hpp"
#include "spinlab/potential.hpp"

using namespace spinlab;

namespace {

Graph bench_graph(int n) {
  CounterRng rng(42);
  return random_bounded_degree(n, 3, 0.5, rng, true);
}

SpinParams hardcore(int n) { return SpinParams::uniform(n, 0, 1, 2); }

void BM_Moments(benchmark::State& st) {
  Graph g = bench_graph(static_cast<int>(st.range(0)));
  SpinParams p = hardcore(g.n);
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_moments(g, p, {}, MomentLevel::Pairs));
}
void BM_MomentsSerial(benchmark::State& st) {
  Graph g = bench_graph(static_cast<int>(st.range(0)));
  SpinParams p = hardcore(g.n);
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_moments_serial(g, p, {}, MomentLevel::Pairs));
}

void BM_Profile(benchmark::State& st) {
  Graph g = bench_graph(static_cast<int>(st.range(0)));
  SpinParams p = hardcore(g.n);
  for (auto _ : st) benchmark::DoNotOptimize(spectral_independence_profile(g, p));
}
void BM_ProfileSerial(benchmark::State& st) {
  Graph g = bench_graph(static_cast<int>(st.range(0)));
  SpinParams p = hardcore(g.n);
  for (auto _ : st) benchmark::DoNotOptimize(spectral_independence_profile_serial(g, p));
}

void BM_Chain(benchmark::State& st) {
  Graph g = bench_graph(static_cast<int>(st.range(0)));
  SpinParams p = hardcore(g.n);
  ChainOptions o;
  o.compute_t_mix = false;
  for (auto _ : st) benchmark::DoNotOptimize(transition_matrix(g, p, {}, o));
}
void BM_ChainSerial(benchmark::State& st) {
  Graph g = bench_graph(static_cast<int>(st.range(0)));
  SpinParams p = hardcore(g.n);
  ChainOptions o;
  o.compute_t_mix = false;
  for (auto _ : st) benchmark::DoNotOptimize(transition_matrix_serial(g, p, {}, o));
}

void BM_Contraction(benchmark::State& st) {
  Potential pot = Potential::lly({0, 1, 2});
  ContractionOptions o;
  o.multistarts = 16;
  for (auto _ : st) benchmark::DoNotOptimize(contraction_sup(pot, static_cast<int>(st.range(0)), o));
}
void BM_ContractionSerial(benchmark::State& st) {
  Potential pot = Potential::lly({0, 1, 2});
  ContractionOptions o;
  o.multistarts = 16;
  for (auto _ : st) benchmark::DoNotOptimize(contraction_sup_serial(pot, static_cast<int>(st.range(0)), o));
}

}  // namespace

BENCHMARK(BM_Moments)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MomentsSerial)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Profile)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProfileSerial)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Chain)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainSerial)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Contraction)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContractionSerial)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
