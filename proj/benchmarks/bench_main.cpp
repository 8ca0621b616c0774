#include <benchmark/benchmark.h>

#include "silfid/corr_structure.hpp"
#include "silfid/pca.hpp"
#include "silfid/synth.hpp"

namespace {

silfid::ResponseMatrix panel(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  silfid::FactorSpec spec;
  spec.n_respondents = rows;
  spec.n_questions = cols;
  spec.missing_rate = 0.4;
  spec.seed = seed;
  return silfid::generate_panel(spec).matrix;
}

void BM_CorrMatrix(benchmark::State& state) {
  const auto m = panel(1000, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(silfid::pairwise_corr_matrix(m));
}
BENCHMARK(BM_CorrMatrix)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Mantel(benchmark::State& state) {
  const auto a = silfid::pairwise_corr_matrix(panel(1000, static_cast<std::size_t>(state.range(0)), 1));
  const auto b = silfid::pairwise_corr_matrix(panel(1000, static_cast<std::size_t>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(silfid::mantel(a, b, 999, 0));
}
BENCHMARK(BM_Mantel)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Impute(benchmark::State& state) {
  const auto m = panel(1000, static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(silfid::iterative_impute(m));
}
BENCHMARK(BM_Impute)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
