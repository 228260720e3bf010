#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "morphtok/sgns.hpp"
#include "planted.hpp"

using namespace morphtok;
using namespace morphtok::sgns;

namespace {

SgnsConfig small_config() {
  SgnsConfig c;
  c.dim = 16;
  c.epochs = 3;
  c.min_count = 1;
  return c;
}

EmbeddingModel fixed_model(TokenizerKind kind) {
  EmbeddingModel m;
  m.vocab = Vocab({"a", "b", "cd"}, {5, 3, 2});
  m.input.resize(3, 2);
  m.input << 1, 2, 3, -4, 0.5f, 0.25f;
  m.output = MatrixF::Zero(3, 2);
  m.kind = kind;
  return m;
}

std::vector<std::string> chars_of(std::string_view w) {
  std::vector<std::string> out;
  for (char c : w) out.emplace_back(1, c);
  return out;
}

}  // namespace

TEST_CASE("window adjustment examples") {
  CHECK(adjust_window(5, 1.0) == 5);
  CHECK(adjust_window(5, 1.99) == 10);
  CHECK(adjust_window(5, 3.75) == 19);
  CHECK(adjust_window(5, 1.2) == 6);
  CHECK(adjust_window(3, 2.0) == 6);
  CHECK_THROWS(adjust_window(0, 1.0));
  CHECK_THROWS(adjust_window(5, 0.5));
}

TEST_CASE("window adjustment is monotone and exact at 1") {
  for (int b = 1; b <= 30; ++b) {
    CHECK(adjust_window(b, 1.0) == b);
    int prev = 0;
    for (double a = 1.0; a <= 6.0; a += 0.01) {
      const int w = adjust_window(b, a);
      CHECK(w >= prev);
      CHECK(w <= adjust_window(b + 1, a));
      CHECK(w >= b * a - 1e-9);
      prev = w;
    }
  }
}

TEST_CASE("vocabulary building") {
  const std::vector<Sentence> corpus{{"x", "x", "x", "x", "y"}, {"y", "y", "y", "y"}};
  const auto vb = build_vocab(corpus, 5);
  CHECK(vb.vocab.size() == 1);
  CHECK(vb.vocab.token(0) == "y");
  CHECK(vb.vocab.find("x") == -1);
  CHECK_THROWS_WITH_AS(build_vocab({}, 5), doctest::Contains("empty_vocab"), std::runtime_error);

  std::vector<Sentence> ab{Sentence(16, "a")};
  ab[0].push_back("b");
  const auto w = build_vocab(ab, 1);
  REQUIRE(w.sampler.probabilities().size() == 2);
  CHECK(w.sampler.probabilities()[0] / w.sampler.probabilities()[1] == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(w.sampler.probabilities()[0] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("vocabulary order is count then token") {
  const auto vb = build_vocab({{"b", "a", "c", "c"}}, 1);
  CHECK(vb.vocab.tokens() == std::vector<std::string>{"c", "a", "b"});
  CHECK_THROWS(Vocab({"a", "a"}, {1, 1}));
}

TEST_CASE("negative sampler frequencies converge") {
  const Vocab v({"a", "b", "c", "d"}, {100, 30, 7, 1});
  const NegativeSampler s(v);
  std::vector<double> expect;
  double z = 0;
  for (double c : {100.0, 30.0, 7.0, 1.0}) {
    expect.push_back(std::pow(c, 0.75));
    z += expect.back();
  }
  Rng rng(123);
  std::vector<std::size_t> hits(4, 0);
  const std::size_t draws = 1000000;
  for (std::size_t i = 0; i < draws; ++i) ++hits[s.sample(rng)];
  for (std::size_t k = 0; k < 4; ++k) {
    const double p = expect[k] / z;
    CHECK(s.probabilities()[k] == doctest::Approx(p).epsilon(1e-12));
    CHECK(std::abs(static_cast<double>(hits[k]) / draws - p) / p < 0.02);
  }
}

TEST_CASE("pair gradient matches finite differences") {
  Rng rng(17);
  const int dim = 4;
  std::vector<std::vector<double>> out(3, std::vector<double>(dim));
  std::vector<double> center(dim);
  for (double& x : center) x = rng.uniform(-1, 1);
  for (auto& row : out) {
    for (double& x : row) x = rng.uniform(-1, 1);
  }
  const std::vector<int> labels{1, 0, 0};
  auto loss = [&]() {
    std::vector<std::span<const double>> t;
    for (const auto& row : out) t.emplace_back(row);
    return pair_loss<double>(center, t, labels);
  };
  std::vector<double> dc(dim);
  std::vector<std::vector<double>> dt(3, std::vector<double>(dim));
  {
    std::vector<std::span<const double>> t;
    std::vector<std::span<double>> d;
    for (const auto& row : out) t.emplace_back(row);
    for (auto& row : dt) d.emplace_back(row);
    pair_gradient<double>(center, t, labels, dc, d);
  }
  const double h = 1e-6;
  auto check = [&](double& x, double analytic) {
    const double keep = x;
    x = keep + h;
    const double up = loss();
    x = keep - h;
    const double down = loss();
    x = keep;
    const double numeric = (up - down) / (2 * h);
    CHECK(std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-8}) < 1e-4);
  };
  for (int d = 0; d < dim; ++d) check(center[static_cast<std::size_t>(d)], dc[static_cast<std::size_t>(d)]);
  for (std::size_t k = 0; k < 3; ++k) {
    for (int d = 0; d < dim; ++d) check(out[k][static_cast<std::size_t>(d)], dt[k][static_cast<std::size_t>(d)]);
  }
}

TEST_CASE("training is deterministic and lowers the loss") {
  const auto corpus = testing::planted_corpus(20, 1500, 6, 1);
  auto cfg = small_config();
  cfg.epochs = 10;
  SgnsTrainLog la, lb;
  const auto a = train_sgns(corpus, cfg, 2, TokenizerKind::kWord, 1.0, &la);
  const auto b = train_sgns(corpus, cfg, 2, TokenizerKind::kWord, 1.0, &lb);
  CHECK(a.input == b.input);
  CHECK(a.output == b.output);
  REQUIRE(la.epoch_loss.size() == 10);
  CHECK(la.epoch_loss.back() < la.epoch_loss.front());
  CHECK(la.epoch_loss == lb.epoch_loss);
  CHECK(a.input.allFinite());
  CHECK(a.adjusted_window == 2);
}

TEST_CASE("planted pairs end up closer than random pairs") {
  const std::size_t pairs = 30;
  const auto corpus = testing::planted_corpus(pairs, 3000, 8, 2);
  auto cfg = small_config();
  cfg.dim = 24;
  cfg.epochs = 5;
  const auto m = train_sgns(corpus, cfg, 1, TokenizerKind::kWord, 1.0);
  const auto st = testing::planted_stats(m, pairs, 1000, 7);
  CHECK(st.planted_mean > st.random_mean);
  CHECK(st.above_random_mean >= 0.95);
}

TEST_CASE("parallel mode keeps the planted signal") {
  const std::size_t pairs = 30;
  const auto corpus = testing::planted_corpus(pairs, 3000, 8, 3);
  auto cfg = small_config();
  cfg.dim = 24;
  cfg.epochs = 5;
  cfg.threads = 3;
  const auto m = train_sgns(corpus, cfg, 1, TokenizerKind::kWord, 1.0);
  CHECK(m.input.allFinite());
  CHECK(testing::planted_stats(m, pairs, 1000, 7).above_random_mean >= 0.95);
}

TEST_CASE("vector lookup cases") {
  const auto word = fixed_model(TokenizerKind::kWord);
  const auto hit = vector_for("b", word, chars_of);
  CHECK(hit.source == VectorSource::kVocab);
  CHECK(hit.values == std::vector<double>{3, -4});
  CHECK_FALSE(vector_for("ab", word, chars_of).covered());

  const auto morph = fixed_model(TokenizerKind::kMorpheme);
  const auto comp = vector_for("ab", morph, chars_of);
  CHECK(comp.source == VectorSource::kCompositional);
  CHECK(comp.values == std::vector<double>{2, -1});
  const auto partial = vector_for("azb", morph, chars_of);
  CHECK(partial.values == std::vector<double>{2, -1});
  CHECK_FALSE(vector_for("zz", morph, chars_of).covered());
  CHECK(vector_for("zz", morph, chars_of).values.empty());
}

TEST_CASE("compositional mean ignores subword order") {
  const auto m = fixed_model(TokenizerKind::kBpe);
  std::vector<std::string> pieces{"a", "b", "cd", "a"};
  const auto base = vector_for("q", m, [&](std::string_view) { return pieces; });
  std::sort(pieces.begin(), pieces.end());
  do {
    const auto r = vector_for("q", m, [&](std::string_view) { return pieces; });
    REQUIRE(r.values.size() == base.values.size());
    for (std::size_t d = 0; d < r.values.size(); ++d) {
      CHECK(r.values[d] == doctest::Approx(base.values[d]).epsilon(1e-15));
      CHECK(std::isfinite(r.values[d]));
    }
  } while (std::next_permutation(pieces.begin(), pieces.end()));
}

TEST_CASE("model file round trip") {
  const auto corpus = testing::planted_corpus(5, 200, 6, 4);
  const auto m = train_sgns(corpus, small_config(), 3, TokenizerKind::kBpe, 3.75);
  const auto bytes = serialize_model(m);
  CHECK(bytes.rfind("MTVEC 1\n", 0) == 0);
  const auto back = deserialize_model(bytes);
  CHECK(back.input == m.input);
  CHECK(back.output == m.output);
  CHECK(back.vocab.tokens() == m.vocab.tokens());
  CHECK(back.kind == TokenizerKind::kBpe);
  CHECK(back.adjusted_window == 3);
  CHECK(back.avg_tokens_per_word == 3.75);
  CHECK(serialize_model(back) == bytes);
  CHECK_THROWS(deserialize_model(bytes.substr(0, bytes.size() - 3)));
}

TEST_CASE("corpus reading and kind names") {
  std::istringstream in("a b  c\n\n d\n");
  const auto c = read_corpus(in);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == Sentence{"a", "b", "c"});
  CHECK(parse_kind("bpe") == TokenizerKind::kBpe);
  CHECK(kind_name(TokenizerKind::kMorpheme) == "morpheme");
  CHECK_THROWS(parse_kind("char"));
  SgnsConfig bad;
  bad.negatives = 0;
  CHECK_THROWS(bad.validate());
}
