#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphtok/rng.hpp"

namespace morphtok::sgns {

enum class TokenizerKind { kWord, kMorpheme, kBpe };

std::string_view kind_name(TokenizerKind k);  // "word" / "morpheme" / "bpe"
TokenizerKind parse_kind(std::string_view name);

struct SgnsConfig {
  int dim = 150;
  int base_window = 5;
  int negatives = 5;
  int epochs = 10;
  std::uint64_t min_count = 5;
  double initial_lr = 0.025;
  std::uint64_t seed = 42;
  /// >1 enables lock-free parallel updates; results are then not bit-reproducible.
  unsigned threads = 1;

  void validate() const;
};

/// ceil(base * avg_tokens_per_word), so windows span the same number of words
/// whatever the tokenization density.
int adjust_window(int base, double avg_tokens_per_word);

/// Token vocabulary ordered by descending count, then token bytes.
class Vocab {
 public:
  Vocab() = default;
  Vocab(std::vector<std::string> tokens, std::vector<std::uint64_t> counts);

  std::size_t size() const { return tokens_.size(); }
  /// Index of `token` or -1.
  long find(std::string_view token) const;
  const std::string& token(std::size_t i) const { return tokens_[i]; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Draws from the unigram distribution raised to 0.75.
class NegativeSampler {
 public:
  NegativeSampler() = default;
  explicit NegativeSampler(const Vocab& vocab, double exponent = 0.75);

  std::size_t sample(Rng& rng) const;
  /// Normalized sampling probabilities, in vocabulary order.
  const std::vector<double>& probabilities() const { return probs_; }

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

using Sentence = std::vector<std::string>;

struct VocabBuild {
  Vocab vocab;
  NegativeSampler sampler;
};

/// Drops tokens seen fewer than `min_count` times. Throws std::runtime_error
/// ("empty_vocab") when nothing survives.
VocabBuild build_vocab(const std::vector<Sentence>& corpus, std::uint64_t min_count);

using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EmbeddingModel {
  Vocab vocab;
  MatrixF input;   // |V| x dim, used for similarity
  MatrixF output;  // |V| x dim, context side
  TokenizerKind kind = TokenizerKind::kWord;
  int adjusted_window = 5;
  double avg_tokens_per_word = 1.0;

  int dim() const { return static_cast<int>(input.cols()); }
};

struct SgnsTrainLog {
  std::vector<double> epoch_loss;  // mean loss per (center, context) pair
  std::uint64_t total_pairs = 0;
};

/// Skip-gram with negative sampling over a fixed window: for every center and
/// every context within `window` positions, one positive and `negatives`
/// sampled negative logistic updates. The learning rate decays linearly to 1%.
EmbeddingModel train_sgns(const std::vector<Sentence>& corpus, const SgnsConfig& cfg, int window,
                          TokenizerKind kind, double avg_tokens_per_word,
                          SgnsTrainLog* log = nullptr);

/// Loss of one center against its targets: -sum log sigmoid(+-v.u), label 1
/// for the observed context and 0 for negatives.
template <typename T>
T pair_loss(std::span<const T> center, const std::vector<std::span<const T>>& targets,
            std::span<const int> labels) {
  T loss = 0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    T s = 0;
    for (std::size_t d = 0; d < center.size(); ++d) s += center[d] * targets[k][d];
    const T z = labels[k] ? s : -s;
    loss += std::log1p(std::exp(-z));
  }
  return loss;
}

/// Gradient of pair_loss. Writes d_center and one d_target per target.
template <typename T>
void pair_gradient(std::span<const T> center, const std::vector<std::span<const T>>& targets,
                   std::span<const int> labels, std::span<T> d_center,
                   const std::vector<std::span<T>>& d_targets) {
  std::fill(d_center.begin(), d_center.end(), T(0));
  for (std::size_t k = 0; k < targets.size(); ++k) {
    T s = 0;
    for (std::size_t d = 0; d < center.size(); ++d) s += center[d] * targets[k][d];
    const T err = T(1) / (T(1) + std::exp(-s)) - T(labels[k]);
    for (std::size_t d = 0; d < center.size(); ++d) {
      d_center[d] += err * targets[k][d];
      d_targets[k][d] = err * center[d];
    }
  }
}

enum class VectorSource { kVocab, kCompositional, kUncovered };

std::string_view source_name(VectorSource s);

struct ResolvedVector {
  VectorSource source = VectorSource::kUncovered;
  std::vector<double> values;  // empty when uncovered
  bool covered() const { return source != VectorSource::kUncovered; }
};

using SubwordFn = std::function<std::vector<std::string>(std::string_view)>;

/// In-vocabulary row, else (for subword models) the mean of the rows of the
/// subwords that are in vocabulary, else uncovered.
ResolvedVector vector_for(std::string_view word, const EmbeddingModel& model,
                          const SubwordFn& subwords);

/// Reads one sentence per line, tokens separated by whitespace.
std::vector<Sentence> read_corpus(std::istream& in);
std::vector<Sentence> read_corpus(const std::filesystem::path& path);

std::string serialize_model(const EmbeddingModel& model);
EmbeddingModel deserialize_model(std::string_view bytes);
void save_model(const std::filesystem::path& path, const EmbeddingModel& model);
EmbeddingModel load_model(const std::filesystem::path& path);

}  // namespace morphtok::sgns
