// Serial reference against the OpenMP kernels. Pass --benchmark_filter to
// pick a kernel; thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "hitfield/montecarlo.hpp"

using namespace hitfield;

namespace {

BlockModel seven_vertices() {
  return BlockModel({{1.0, 0.6, 0.3, 0.8}, {0.9, 0.4, 0.7}},
                    SquareMatrix::from_rows({{0.8, 0.5}, {0.5, 1.2}}));
}

BlockModel four_vertices() {
  return BlockModel({{1.0, 0.6}, {0.9, 0.4}},
                    SquareMatrix::from_rows({{0.8, 0.5}, {0.5, 1.2}}));
}

void BM_exact_serial(benchmark::State& st) {
  BlockModel m = seven_vertices();
  for (auto _ : st) benchmark::DoNotOptimize(exact_partition_distribution_serial(m));
}

void BM_exact_parallel(benchmark::State& st) {
  BlockModel m = seven_vertices();
  for (auto _ : st) benchmark::DoNotOptimize(exact_partition_distribution(m));
}

void BM_graph_counts_serial(benchmark::State& st) {
  BlockModel m = four_vertices();
  McConfig cfg{st.range(0), 1, 0};
  for (auto _ : st) benchmark::DoNotOptimize(mc_component_counts_serial(m, Sampler::graph, cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_graph_counts_parallel(benchmark::State& st) {
  BlockModel m = four_vertices();
  McConfig cfg{st.range(0), 1, 0};
  for (auto _ : st) benchmark::DoNotOptimize(mc_component_counts(m, Sampler::graph, cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_delta_serial(benchmark::State& st) {
  BlockModel m = four_vertices();
  McConfig cfg{st.range(0), 1, 0};
  for (auto _ : st) benchmark::DoNotOptimize(mc_delta_sequences_serial(m, {1.0, 0.5}, cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_delta_parallel(benchmark::State& st) {
  BlockModel m = four_vertices();
  McConfig cfg{st.range(0), 1, 0};
  for (auto _ : st) benchmark::DoNotOptimize(mc_delta_sequences(m, {1.0, 0.5}, cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_exact_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_exact_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_graph_counts_serial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_graph_counts_parallel)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_delta_serial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_delta_parallel)->Arg(20000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
