#include <benchmark/benchmark.h>

#include <random>

#include "pdsim/dataflow.hpp"
#include "pdsim/digital_die.hpp"
#include "pdsim/workload.hpp"

using namespace pdsim;

namespace {

QuantizedMatrix random_matrix(std::size_t rows, std::size_t cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int32_t> codes(rows * cols);
  for (auto& c : codes) c = static_cast<int32_t>(rng() % 15) - 7;
  return QuantizedMatrix(rows, cols, std::move(codes), 4, 1.0);
}

void BM_RunGemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1);
  const auto b = random_matrix(n, n, 2);
  const HardwareConfig hw;
  for (auto _ : state) benchmark::DoNotOptimize(run_gemm(a, b, hw, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}
BENCHMARK(BM_RunGemm)->Arg(64)->Arg(128)->Arg(256);

void BM_Partition(benchmark::State& state) {
  const auto m = random_matrix(512, 512, 3);
  for (auto _ : state) benchmark::DoNotOptimize(partition(m, 64, 64));
}
BENCHMARK(BM_Partition);

void BM_SoftmaxRow(benchmark::State& state) {
  const SoftmaxLut lut;
  std::mt19937_64 rng(4);
  std::vector<double> row(static_cast<std::size_t>(state.range(0)));
  for (auto& x : row) x = static_cast<double>(rng() % 200) - 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(softmax_row(row, 0.05, 64, lut));
}
BENCHMARK(BM_SoftmaxRow)->Arg(128)->Arg(512);

void BM_Attention(benchmark::State& state) {
  WorkloadSpec ws;
  ws.seq_len = static_cast<std::size_t>(state.range(0));
  const auto w = gen_workload(ws, 5);
  const HardwareConfig hw;
  for (auto _ : state) benchmark::DoNotOptimize(run_attention(w, hw, 5));
}
BENCHMARK(BM_Attention)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
