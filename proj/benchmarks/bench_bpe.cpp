#include <benchmark/benchmark.h>

#include "morphtok/bpe.hpp"
#include "morphtok/rng.hpp"

using namespace morphtok;

namespace {

std::vector<bpe::WordCount> corpus(std::size_t n) {
  Rng rng(7);
  std::vector<bpe::WordCount> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string w;
    const std::size_t len = 3 + rng.below(8);
    for (std::size_t k = 0; k < len; ++k) w += static_cast<char>('a' + rng.below(12));
    out.push_back({w, 1 + rng.below(20)});
  }
  return out;
}

void BM_BpeTrain(benchmark::State& state) {
  const auto c = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bpe::train_bpe(c, {500, 2}));
}
BENCHMARK(BM_BpeTrain)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BpeEncode(benchmark::State& state) {
  const auto c = corpus(5000);
  const auto model = bpe::train_bpe(c, {800, 2});
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bpe::bpe_encode(c[i % c.size()].word, model));
    ++i;
  }
}
BENCHMARK(BM_BpeEncode);

}  // namespace
