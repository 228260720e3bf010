#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphtok/labels.hpp"
#include "morphtok/sgns.hpp"

namespace morphtok::eval {

/// Compensated (Neumaier) running sum; keeps reductions order-insensitive to ~1e-15.
class NeumaierSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double mean_of(std::span<const double> xs);
/// Population standard deviation (divides by n).
double population_sd(std::span<const double> xs);

/// Clamped to [-1, 1]. Throws std::domain_error("zero_norm") for a zero vector
/// and std::invalid_argument for a dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

struct UniMorphEntry {
  std::string lemma;
  std::string wordform;
  std::vector<std::string> features;
  PosTag pos = PosTag::kOther;
};

/// POS from the first feature tag.
PosTag pos_from_features(const std::vector<std::string>& features);

/// `lemma TAB wordform TAB f1;f2;...`. Blank and `#` lines skipped; errors carry line numbers.
std::vector<UniMorphEntry> parse_unimorph(std::string_view text);
std::vector<UniMorphEntry> load_unimorph(const std::filesystem::path& path);

struct SimilarityRecord {
  std::size_t entry = 0;  // index into the evaluated entry list
  sgns::TokenizerKind model_kind = sgns::TokenizerKind::kWord;
  std::optional<double> similarity;
  sgns::VectorSource lemma_source = sgns::VectorSource::kUncovered;
  sgns::VectorSource wordform_source = sgns::VectorSource::kUncovered;
};

struct SimilaritySummary {
  std::size_t total = 0;
  std::size_t covered = 0;
  double coverage = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  bool empty = true;  // no covered pairs
};

SimilaritySummary summarize(const std::vector<SimilarityRecord>& records);

struct MorphSimilarity {
  std::vector<SimilarityRecord> records;
  SimilaritySummary summary;
};

MorphSimilarity morph_similarity_eval(const std::vector<UniMorphEntry>& entries,
                                      const sgns::EmbeddingModel& model,
                                      const sgns::SubwordFn& subwords);

/// |A n B| / |A u B|, and 1 when both are empty.
double jaccard_agreement(const std::set<int>& a, const std::set<int>& b);

struct AgreementReport {
  std::size_t words = 0;
  double mean_agreement = 0.0;
  double zero_fraction = 0.0;
  double partial_fraction = 0.0;
  double perfect_fraction = 0.0;
  double morph_tokens_per_word = 0.0;
  double bpe_tokens_per_word = 0.0;
  std::vector<double> per_word;
};

/// Both tokenizers are given as word -> token list functions.
AgreementReport agreement_summary(const std::vector<std::string>& words,
                                  const sgns::SubwordFn& morph_tokens,
                                  const sgns::SubwordFn& bpe_tokens);

struct Neighbor {
  std::size_t index = 0;
  double similarity = 0.0;
};

/// Exact top-k by cosine over input vectors, excluding the query itself.
/// Ties go to the lower vocabulary index. Zero rows are never neighbors.
std::vector<Neighbor> nearest_neighbors(const sgns::EmbeddingModel& model, std::size_t query,
                                        std::size_t k);

struct NeighborCurve {
  std::vector<double> mean_similarity;  // index r-1 holds rank r
  std::size_t queries = 0;
};

/// Seeded sample of query tokens (without replacement, count >= min_count),
/// averaged similarity per neighbor rank.
NeighborCurve neighbor_rank_curve(const sgns::EmbeddingModel& model, std::size_t query_sample_size,
                                  std::size_t k, std::uint64_t seed, std::uint64_t min_count = 1);

/// (s1 - s_r) / s1 as a percentage; `rank` is 1-based.
double dropoff(const std::vector<double>& curve, std::size_t rank);

/// mean(inter) / mean(intra).
double separation_ratio(std::span<const double> intra, std::span<const double> inter);

struct SeparationResult {
  std::vector<double> intra;  // cosine distances 1 - sim
  std::vector<double> inter;
  double mean_intra = 0.0;
  double mean_inter = 0.0;
  double ratio = 0.0;
  std::size_t lemmas = 0;  // lemmas with >= 2 covered forms
  bool inter_sampled = false;
};

/// Groups distinct covered wordforms by lemma. Inter-lemma distances are a
/// seeded subsample when more than `max_inter` pairs exist. Throws
/// std::invalid_argument when fewer than two lemmas have two covered forms.
SeparationResult allomorph_separation(const std::vector<UniMorphEntry>& entries,
                                      const sgns::EmbeddingModel& model,
                                      const sgns::SubwordFn& subwords, std::uint64_t seed,
                                      std::size_t max_inter = 1'000'000);

inline constexpr std::array<double, 4> kBinEdges{-1.0, 0.4, 0.8, 1.0};

struct Distribution {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> fractions{};
  bool empty = true;
};

/// Bins [-1, 0.4), [0.4, 0.8), [0.8, 1.0] over covered records.
Distribution similarity_distribution(const std::vector<SimilarityRecord>& records);
Distribution similarity_distribution(std::span<const double> similarities);

struct NamedVocab {
  std::string name;
  std::vector<std::string> tokens;
};

struct Overlap {
  std::string a, b;
  std::size_t size_a = 0, size_b = 0;
  std::size_t shared = 0;
  double pct_of_a = 0.0;
  double pct_of_b = 0.0;
};

/// One entry per unordered pair, in input order. Throws when given fewer than two vocabularies.
std::vector<Overlap> vocab_overlap(const std::vector<NamedVocab>& vocabs);

struct PosAccuracy {
  std::size_t words = 0;
  std::size_t exact = 0;
  double accuracy() const { return words ? static_cast<double>(exact) / static_cast<double>(words) : 0.0; }
};

struct BoundaryReport {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t words = 0;
  double word_accuracy = 0.0;
  std::map<std::string, PosAccuracy> per_pos;  // keyed by pos_name; untagged words count as OTHER
};

/// Micro-averaged interior-boundary P/R/F1 plus exact-match accuracy by POS.
/// Throws std::invalid_argument when the word lists differ.
BoundaryReport boundary_prf(const std::vector<AnnotatedWord>& gold,
                            const std::vector<std::vector<std::string>>& predicted);

/// P/R/F1 from raw tallies. An empty denominator yields 1 when the other tally
/// is also zero, else 0.
BoundaryReport boundary_prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

struct RestrictedModel {
  std::string name;
  SimilaritySummary summary;
  Distribution distribution;
};

struct RestrictedComparison {
  std::size_t total = 0;
  std::size_t intersection = 0;
  bool empty = true;
  std::vector<RestrictedModel> models;
};

/// Recomputes summaries on entries covered by every model. All record lists
/// must describe the same entry list.
RestrictedComparison restricted_comparison(
    const std::vector<std::pair<std::string, std::vector<SimilarityRecord>>>& per_model);

}  // namespace morphtok::eval
