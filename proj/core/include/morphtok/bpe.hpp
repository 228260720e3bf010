#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace morphtok::bpe {

struct BpeConfig {
  /// Target token count, alphabet included.
  std::size_t vocab_size = 2280;
  std::uint64_t min_frequency = 2;
};

struct Merge {
  std::string left;
  std::string right;
  std::string merged() const { return left + right; }
  friend bool operator==(const Merge&, const Merge&) = default;
};

struct MergeStep {
  Merge pair;
  std::uint64_t count = 0;
};

struct WordCount {
  std::string word;
  std::uint64_t count = 1;
};

/// Ordered merge list plus vocabulary. Word-internal: no end-of-word marker.
class BpeModel {
 public:
  BpeModel() = default;
  BpeModel(std::vector<Merge> merges, std::vector<std::string> alphabet, BpeConfig cfg);

  const std::vector<Merge>& merges() const { return merges_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const BpeConfig& config() const { return cfg_; }

  /// Token -> count in the encoded training corpus (0 when unknown, e.g. after loading).
  const std::map<std::string, std::uint64_t>& vocab() const { return vocab_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  bool contains(const std::string& token) const { return vocab_.count(token) > 0; }

  /// Rank of a merge pair, or -1.
  long rank(const std::string& left, const std::string& right) const;

  void set_counts(std::map<std::string, std::uint64_t> counts);

 private:
  std::vector<Merge> merges_;
  std::vector<std::string> alphabet_;
  BpeConfig cfg_;
  std::map<std::string, std::uint64_t> vocab_;
  std::unordered_map<std::string, long> ranks_;
};

/// Greedy training: merge the adjacent pair with the highest weighted count;
/// ties go to the lexicographically smallest concatenation, then the smaller
/// left token. Stops at `vocab_size` tokens or when the best count drops
/// below `min_frequency`. `trace`, when given, receives every merge with its count.
BpeModel train_bpe(const std::vector<WordCount>& words, const BpeConfig& cfg,
                   std::vector<MergeStep>* trace = nullptr);

/// Character split followed by the merges in training order. Characters
/// outside the alphabet stay single tokens. Tokens always concatenate to `word`.
std::vector<std::string> bpe_encode(std::string_view word, const BpeModel& model);

struct TokenStats {
  std::size_t words = 0;
  double mean_tokens = 0.0;
  std::map<std::size_t, std::size_t> histogram;  // tokens-per-word -> word count
};

TokenStats token_stats(const std::vector<std::string>& words, const BpeModel& model);

/// Whitespace-split word frequencies, sorted by word.
std::vector<WordCount> count_words(std::istream& in);

std::string serialize_model(const BpeModel& model);
BpeModel deserialize_model(std::string_view text);
void save_model(const std::filesystem::path& path, const BpeModel& model);
BpeModel load_model(const std::filesystem::path& path);

}  // namespace morphtok::bpe
