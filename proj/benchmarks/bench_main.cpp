#include <benchmark/benchmark.h>

#include <vector>

#include "isochr/chr.hpp"
#include "isochr/codec.hpp"
#include "isochr/isosurf.hpp"
#include "isochr/volume.hpp"

using namespace isochr;

namespace {

const Volume& field(std::size_t n) {
  static std::vector<std::pair<std::size_t, Volume>> cache;
  for (auto& [size, v] : cache)
    if (size == n) return v;
  const double c = (static_cast<double>(n) - 1) / 2 + 0.25;
  cache.emplace_back(n, gen_sphere({n, n, n}, {c, c, c}, static_cast<double>(n) / 3));
  return cache.back().second;
}

void BM_LorenzoCompress(benchmark::State& state) {
  const Volume& v = field(static_cast<std::size_t>(state.range(0)));
  const double e = 1e-3 * (v.vmax() - v.vmin());
  std::size_t bytes = 0;
  for (auto _ : state) {
    auto block = compress(v.view(), e);
    bytes = block.payload.size();
    benchmark::DoNotOptimize(block);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * v.size() * 8));
  state.counters["ratio"] = static_cast<double>(v.size() * 8) / static_cast<double>(bytes);
}
BENCHMARK(BM_LorenzoCompress)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LorenzoDecompress(benchmark::State& state) {
  const Volume& v = field(static_cast<std::size_t>(state.range(0)));
  const auto block = compress(v.view(), 1e-3 * (v.vmax() - v.vmin()));
  for (auto _ : state) benchmark::DoNotOptimize(decompress(block));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * v.size() * 8));
}
BENCHMARK(BM_LorenzoDecompress)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MarchingCubes(benchmark::State& state) {
  const Volume& v = field(static_cast<std::size_t>(state.range(0)));
  const auto workers = static_cast<unsigned>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(marching_cubes(v.view(), v.spacing(), {0, 0, 0}, 0.0, workers));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * v.size()));
}
BENCHMARK(BM_MarchingCubes)->Args({64, 1})->Args({128, 1})->Args({128, 4})->Unit(benchmark::kMillisecond);

void BM_BuildChr(benchmark::State& state) {
  const Volume& v = field(128);
  ChrOptions o;
  o.block_size = static_cast<std::size_t>(state.range(0));
  o.accuracy = static_cast<double>(state.range(1)) / 100.0;
  const std::vector<double> ks = {0.0};
  for (auto _ : state) benchmark::DoNotOptimize(build_chr(v, ks, o));
}
BENCHMARK(BM_BuildChr)->Args({64, 100})->Args({64, 80})->Args({32, 100})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
