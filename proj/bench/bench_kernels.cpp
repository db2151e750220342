// Serial reference against the OpenMP and FFT paths.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "stable_llt/aslt_sim.hpp"
#include "stable_llt/kernels.hpp"
#include "stable_llt/rng.hpp"
#include "stable_llt/stable_law.hpp"

using namespace stable_llt;

namespace {

std::vector<double> probs(std::size_t n, std::uint64_t seed) {
  SeededStream s(seed, 0);
  std::vector<double> v(n);
  for (double& x : v) x = s.next_uniform();
  const double tot = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= tot;
  return v;
}

void BM_convolve_serial(benchmark::State& st) {
  const auto a = probs(st.range(0), 1), b = probs(st.range(0), 2);
  for (auto _ : st) benchmark::DoNotOptimize(convolve_serial(a, b));
  st.SetComplexityN(st.range(0));
}

void BM_convolve_omp(benchmark::State& st) {
  const auto a = probs(st.range(0), 1), b = probs(st.range(0), 2);
  for (auto _ : st) benchmark::DoNotOptimize(convolve_omp(a, b));
  st.SetComplexityN(st.range(0));
}

void BM_convolve_fft(benchmark::State& st) {
  const auto a = probs(st.range(0), 1), b = probs(st.range(0), 2);
  for (auto _ : st) benchmark::DoNotOptimize(convolve_fft(a, b));
  st.SetComplexityN(st.range(0));
}

std::vector<double> density_points() {
  std::vector<double> xs;
  for (int i = -64; i <= 64; ++i) xs.push_back(0.125 * i);
  return xs;
}

void BM_density_serial(benchmark::State& st) {
  const auto xs = density_points();
  const StableParams p = make_stable(1.5, 0.4, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(density_grid_serial(p, xs, 1e-9));
}

void BM_density_omp(benchmark::State& st) {
  const auto xs = density_points();
  const StableParams p = make_stable(1.5, 0.4, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(density_grid(p, xs, 1e-9));
}

struct PathSetup {
  LatticeLaw law = zipf_symmetric(1.5);
  NormingSeq seq = NormingSeq::for_law(zipf_symmetric(1.5));
  std::vector<std::uint64_t> seeds;
  std::vector<std::int64_t> checkpoints{1000, 10000};
  PathSetup() : seeds(16) { std::iota(seeds.begin(), seeds.end(), 0); }
};

void BM_paths_serial(benchmark::State& st) {
  const PathSetup s;
  for (auto _ : st) benchmark::DoNotOptimize(run_paths_serial(s.law, s.seq, 0.0, 10000, s.seeds, s.checkpoints));
}

void BM_paths_omp(benchmark::State& st) {
  const PathSetup s;
  for (auto _ : st) benchmark::DoNotOptimize(run_paths(s.law, s.seq, 0.0, 10000, s.seeds, s.checkpoints));
}

}  // namespace

BENCHMARK(BM_convolve_serial)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_convolve_omp)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_convolve_fft)->RangeMultiplier(4)->Range(256, 1 << 18)->Complexity(benchmark::oNLogN);
BENCHMARK(BM_density_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_density_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_paths_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_paths_omp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
