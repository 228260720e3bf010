#include <benchmark/benchmark.h>

#include "morphtok/evalsuite.hpp"
#include "morphtok/rng.hpp"

using namespace morphtok;

namespace {

sgns::EmbeddingModel model(std::size_t n, int dim) {
  sgns::EmbeddingModel m;
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < n; ++i) toks.push_back("t" + std::to_string(i));
  m.vocab = sgns::Vocab(toks, std::vector<std::uint64_t>(n, 5));
  Rng rng(11);
  m.input.resize(static_cast<long>(n), dim);
  for (long i = 0; i < m.input.size(); ++i) m.input.data()[i] = static_cast<float>(rng.uniform(-1, 1));
  m.output = sgns::MatrixF::Zero(static_cast<long>(n), dim);
  return m;
}

void BM_NearestNeighbors(benchmark::State& state) {
  const auto m = model(static_cast<std::size_t>(state.range(0)), 150);
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval::nearest_neighbors(m, q % m.vocab.size(), 20));
    ++q;
  }
}
BENCHMARK(BM_NearestNeighbors)->Arg(2000)->Arg(20000)->Unit(benchmark::kMicrosecond);

}  // namespace
