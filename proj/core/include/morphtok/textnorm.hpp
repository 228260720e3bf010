#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "morphtok/utf8.hpp"

namespace morphtok::textnorm {

using CodepointSet = std::unordered_set<Codepoint>;

struct CharRule {
  std::u32string source;
  std::u32string target;  // empty target deletes the source
  friend bool operator==(const CharRule&, const CharRule&) = default;
};

/// Normalization and filtering parameters.
///
/// `allowed_chars` is everything that survives normalization (script letters,
/// tolerated loan letters, digits, punctuation). `script_letters` is the
/// native-letter subset used by the quality and dialect filters; a letter
/// outside it counts as foreign even when it is allowed.
struct NormalizationConfig {
  std::vector<CharRule> char_map;
  CodepointSet allowed_chars;
  CodepointSet script_letters;
  CodepointSet sentence_delimiters;
  int max_repeat = 3;
  int min_sentence_chars = 5;
  int min_tokens = 1;
  double fuzzy_dedup_threshold = 0.8;
  double dialect_foreign_ratio = 0.05;
  std::size_t dedup_window = 10000;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Sorani defaults: ە/ه family, Arabic/Persian yeh and kaf variants, ZWNJ removal.
NormalizationConfig default_config();
std::vector<CharRule> default_char_map();

/// Reads the char-map data file format (`U+XXXX ... <TAB> U+XXXX ...`, `#` comments).
std::vector<CharRule> parse_char_map(std::string_view text);
std::vector<CharRule> load_char_map(const std::filesystem::path& path);

/// JSON config; absent keys keep their defaults.
NormalizationConfig load_config(const std::filesystem::path& path);
NormalizationConfig config_from_json_text(std::string_view json_text);
std::string config_to_json_text(const NormalizationConfig& cfg);

/// NFC, char map to fixpoint, disallowed-character drop, whitespace folding
/// and repetition collapse, iterated until stable. Idempotent.
std::string normalize_line(std::string_view line, const NormalizationConfig& cfg,
                           std::size_t* dropped_chars = nullptr);

/// Applies the ordered char map until nothing changes.
std::u32string apply_char_map(std::u32string text, const std::vector<CharRule>& rules);

std::u32string collapse_repeats(std::u32string_view text, int max_repeat);

enum class FilterReason { kKept, kTooShort, kTooFewTokens, kNoScriptLetters, kDialect };

std::string_view reason_name(FilterReason r);

struct FilterDecision {
  bool keep = true;
  FilterReason reason = FilterReason::kKept;
  /// Share of letters outside `script_letters`; 0 when no letters.
  double foreign_ratio = 0.0;
};

FilterDecision filter_sentence(std::string_view sentence, const NormalizationConfig& cfg);

struct CleanSentence {
  std::string text;
  std::size_t token_count = 0;
  std::size_t source_line = 0;
  friend bool operator==(const CleanSentence&, const CleanSentence&) = default;
};

CleanSentence make_sentence(std::string text, std::size_t source_line);

std::vector<CleanSentence> segment_sentences(std::string_view document,
                                             const NormalizationConfig& cfg,
                                             std::size_t source_line = 0);

/// Token-set Jaccard; two empty sets count as identical.
double token_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

enum class DedupVerdict { kUnique, kExact, kFuzzy };

/// Streaming exact + fuzzy deduplication.
///
/// Exact duplicates are checked against every kept sentence. Fuzzy duplicates
/// are checked against the last `dedup_window` kept sentences; candidates come
/// from a prefix-filter index, so only sets that could reach the threshold are
/// verified.
class NearDuplicateFilter {
 public:
  explicit NearDuplicateFilter(const NormalizationConfig& cfg);
  ~NearDuplicateFilter();
  NearDuplicateFilter(NearDuplicateFilter&&) noexcept;
  NearDuplicateFilter& operator=(NearDuplicateFilter&&) noexcept;

  /// Classifies `text`; unique sentences are inserted into the index.
  DedupVerdict offer(std::string_view text);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct CorpusStats {
  std::size_t input_lines = 0;
  std::size_t input_sentences = 0;
  std::size_t kept_sentences = 0;
  std::size_t exact_dups_removed = 0;
  std::size_t fuzzy_dups_removed = 0;
  std::size_t dialect_filtered = 0;
  std::size_t quality_filtered = 0;
  std::size_t token_total = 0;
  std::size_t chars_dropped = 0;

  std::size_t removed() const {
    return exact_dups_removed + fuzzy_dups_removed + dialect_filtered + quality_filtered;
  }
  std::string to_json_text() const;
};

struct DedupResult {
  std::vector<CleanSentence> kept;
  std::size_t exact_removed = 0;
  std::size_t fuzzy_removed = 0;
};

DedupResult dedup_corpus(const std::vector<CleanSentence>& sentences,
                         const NormalizationConfig& cfg);

enum class InputMode { kDocument, kLine };

struct CorpusResult {
  std::vector<CleanSentence> sentences;
  CorpusStats stats;
};

/// Full pipeline over an input stream. Normalization and filtering run on
/// `threads` workers; output order always equals single-threaded order.
CorpusResult normalize_corpus(std::istream& in, const NormalizationConfig& cfg,
                              InputMode mode, unsigned threads = 1);

void write_sentences(const std::filesystem::path& path,
                     const std::vector<CleanSentence>& sentences);
void write_words(const std::filesystem::path& path, const std::vector<CleanSentence>& sentences);

}  // namespace morphtok::textnorm
