#pragma once

#include <string>
#include <vector>

#include "morphtok/rng.hpp"
#include "morphtok/sgns.hpp"

namespace morphtok::testing {

inline std::string planted_left(std::size_t i) { return "l" + std::to_string(i); }
inline std::string planted_right(std::size_t i) { return "r" + std::to_string(i); }

/// Each sentence belongs to one random pair: every token is, with
/// probability `own`, a member of that pair and otherwise a uniform draw from
/// all planted tokens.
inline std::vector<sgns::Sentence> planted_corpus(std::size_t pairs, std::size_t sentences,
                                                  std::size_t length, std::uint64_t seed,
                                                  double own = 0.5) {
  Rng rng(seed);
  std::vector<sgns::Sentence> out;
  out.reserve(sentences);
  for (std::size_t s = 0; s < sentences; ++s) {
    const std::size_t i = rng.below(pairs);
    sgns::Sentence sent;
    for (std::size_t k = 0; k < length; ++k) {
      const std::size_t p = rng.bernoulli(own) ? i : rng.below(pairs);
      sent.push_back(rng.bernoulli(0.5) ? planted_left(p) : planted_right(p));
    }
    out.push_back(std::move(sent));
  }
  return out;
}

struct PlantedStats {
  double planted_mean = 0.0;
  double random_mean = 0.0;
  double above_random_mean = 0.0;  // fraction of planted pairs
};

/// Planted-pair cosines against `random_pairs` seeded pairs of tokens drawn
/// from different planted pairs.
inline PlantedStats planted_stats(const sgns::EmbeddingModel& m, std::size_t pairs,
                                  std::size_t random_pairs, std::uint64_t seed) {
  auto row = [&](const std::string& t) -> Eigen::RowVectorXd {
    return m.input.row(m.vocab.find(t)).cast<double>();
  };
  auto cos = [](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    return a.dot(b) / (a.norm() * b.norm());
  };
  auto token = [](std::size_t i) { return i % 2 ? planted_right(i / 2) : planted_left(i / 2); };
  std::vector<double> planted;
  for (std::size_t i = 0; i < pairs; ++i) planted.push_back(cos(row(planted_left(i)), row(planted_right(i))));
  Rng rng(seed);
  double random_sum = 0.0;
  for (std::size_t k = 0; k < random_pairs; ++k) {
    std::size_t a, b;
    do {
      a = rng.below(2 * pairs);
      b = rng.below(2 * pairs);
    } while (a / 2 == b / 2);
    random_sum += cos(row(token(a)), row(token(b)));
  }
  PlantedStats s;
  s.random_mean = random_sum / static_cast<double>(random_pairs);
  std::size_t above = 0;
  for (double x : planted) {
    s.planted_mean += x / static_cast<double>(pairs);
    if (x > s.random_mean) ++above;
  }
  s.above_random_mean = static_cast<double>(above) / static_cast<double>(pairs);
  return s;
}

}  // namespace morphtok::testing
