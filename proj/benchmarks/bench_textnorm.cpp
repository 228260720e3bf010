#include <benchmark/benchmark.h>

#include "morphtok/textnorm.hpp"

using namespace morphtok;

namespace {

void BM_NormalizeLine(benchmark::State& state) {
  const auto cfg = textnorm::default_config();
  const std::string line = "كتێبەکانم دەخوێنمـــەوە لە ماڵەووووو، بەيانی زوو!";
  for (auto _ : state) benchmark::DoNotOptimize(textnorm::normalize_line(line, cfg));
}
BENCHMARK(BM_NormalizeLine);

void BM_Dedup(benchmark::State& state) {
  auto cfg = textnorm::default_config();
  std::vector<textnorm::CleanSentence> sents;
  for (int i = 0; i < state.range(0); ++i) {
    sents.push_back(textnorm::make_sentence(
        "وشە" + std::to_string(i % 97) + " نووسین " + std::to_string(i % 13) + " ماڵ " + std::to_string(i),
        static_cast<std::size_t>(i)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(textnorm::dedup_corpus(sents, cfg));
}
BENCHMARK(BM_Dedup)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
