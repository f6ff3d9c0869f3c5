// Serial reference kernels against their OpenMP versions, and sequential
// against round-parallel stabilization.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>
#include <memory>
#include <random>

#include "isosand/experiment.hpp"
#include "isosand/sandpile.hpp"
#include "isosand/weights.hpp"

using namespace isosand;

namespace {

const WeightedGraph& patch(int radius) {
  static std::map<int, WeightedGraph> cache;
  auto it = cache.find(radius);
  if (it == cache.end()) {
    it = cache
             .emplace(radius, weigh_graph(std::make_shared<IsoradialGraph>(
                                              build_square_lattice(radius)),
                                          0.5))
             .first;
  }
  return it->second;
}

std::vector<double> random_field(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> f(n);
  for (auto& v : f) v = u(rng);
  return f;
}

template <auto Kernel>
void run_kernel(benchmark::State& state) {
  const auto& w = patch(static_cast<int>(state.range(0)));
  if (state.range(1) > 0) omp_set_num_threads(static_cast<int>(state.range(1)));
  const auto f = random_field(w.size());
  std::vector<double> out;
  for (auto _ : state) {
    Kernel(w, f, out, {});
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.size()));
}

void BM_LaplacianSerial(benchmark::State& s) { run_kernel<serial::laplacian_apply>(s); }
void BM_LaplacianOmp(benchmark::State& s) { run_kernel<isosand::laplacian_apply>(s); }
void BM_OperatorTSerial(benchmark::State& s) { run_kernel<serial::operator_T_apply>(s); }
void BM_OperatorTOmp(benchmark::State& s) { run_kernel<isosand::operator_T_apply>(s); }

void BM_StabilizeBatched(benchmark::State& state) {
  const auto& w = patch(100);
  const double N = static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto st = stabilize_batched(w, N, w.graph().origin);
    benchmark::DoNotOptimize(st.total_topples);
  }
}

void BM_StabilizeParallel(benchmark::State& state) {
  const auto& w = patch(100);
  const double N = static_cast<double>(state.range(0));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto st = stabilize_parallel(w, N, w.graph().origin, workers);
    benchmark::DoNotOptimize(st.total_topples);
  }
}

}  // namespace

BENCHMARK(BM_LaplacianSerial)->Args({100, 0})->Args({300, 0});
BENCHMARK(BM_LaplacianOmp)->UseRealTime()->Args({100, 1})->Args({300, 1})->Args({300, 2})->Args({300, 4});
BENCHMARK(BM_OperatorTSerial)->Args({100, 0})->Args({300, 0});
BENCHMARK(BM_OperatorTOmp)->UseRealTime()->Args({100, 1})->Args({300, 1})->Args({300, 2})->Args({300, 4});
BENCHMARK(BM_StabilizeBatched)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StabilizeParallel)
    ->UseRealTime()
    ->Args({10000, 1})
    ->Args({10000, 2})
    ->Args({100000, 1})
    ->Args({100000, 2})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
