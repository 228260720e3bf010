#include <benchmark/benchmark.h>

#include "morphtok/crf.hpp"
#include "morphtok/rng.hpp"
#include "morphtok/segmenter.hpp"

using namespace morphtok;

namespace {

crf::Matrix random_emissions(Rng& rng, int n) {
  crf::Matrix e(n, 2);
  for (int i = 0; i < e.size(); ++i) e.data()[i] = rng.uniform(-2, 2);
  return e;
}

void BM_Viterbi(benchmark::State& state) {
  Rng rng(1);
  const auto e = random_emissions(rng, static_cast<int>(state.range(0)));
  const auto t = crf::Transitions::zeros(2);
  for (auto _ : state) benchmark::DoNotOptimize(crf::viterbi(e, t));
}
BENCHMARK(BM_Viterbi)->Arg(8)->Arg(32)->Arg(128);

void BM_NllGradient(benchmark::State& state) {
  Rng rng(2);
  const auto e = random_emissions(rng, static_cast<int>(state.range(0)));
  const auto t = crf::Transitions::zeros(2);
  std::vector<int> y(static_cast<std::size_t>(state.range(0)), 0);
  for (auto _ : state) benchmark::DoNotOptimize(crf::nll_gradient(e, y, t));
}
BENCHMARK(BM_NllGradient)->Arg(8)->Arg(32);

void BM_SegmenterLossAndGradient(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  const seg::ModelShape shape{40, 64, hidden, 3, 2};
  Rng rng(3);
  const auto p = seg::SegmenterParams::random(shape, 0.0, rng);
  auto grad = seg::SegmenterParams::zeros(shape);
  const std::vector<int> ids{2, 5, 9, 11, 3, 7, 20, 4};
  const std::vector<int> labels{0, 0, 1, 0, 0, 1, 0, 1};
  for (auto _ : state) benchmark::DoNotOptimize(seg::loss_and_gradient(ids, labels, p, grad));
}
BENCHMARK(BM_SegmenterLossAndGradient)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace
