#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "morphtok/evalsuite.hpp"

namespace morphtok::eval {

inline constexpr int kReportSchemaVersion = 1;

struct EvalModel {
  std::string name;
  const sgns::EmbeddingModel* model = nullptr;
  sgns::SubwordFn subwords;  // empty for word-level models
};

struct EvalOptions {
  std::size_t queries = 500;
  std::size_t k = 20;
  std::uint64_t seed = 42;
  std::vector<std::size_t> dropoff_ranks{5, 10, 20};
  std::size_t max_inter_pairs = 1'000'000;
};

struct SourceCounts {
  std::size_t vocab = 0, compositional = 0, uncovered = 0;
};

struct ModelSection {
  std::string name;
  sgns::TokenizerKind kind = sgns::TokenizerKind::kWord;
  std::size_t vocab_size = 0;
  int window = 0;
  double avg_tokens_per_word = 1.0;
  MorphSimilarity similarity;
  SourceCounts lemma_sources, wordform_sources;
  Distribution distribution;
  std::string pattern;  // concentrated / intermediate / dispersed
  NeighborCurve curve;
  std::map<std::size_t, double> dropoffs;  // rank -> percent
  std::optional<SeparationResult> separation;
  std::string separation_error;
  std::string cohesion;  // highest / moderate / lowest, relative to the other models
};

struct MetricSpread {
  std::vector<double> values;  // one per run
  double mean = 0.0;
  double sd = 0.0;
};

struct EvaluationReport {
  std::size_t entries = 0;
  std::size_t runs = 1;
  EvalOptions options;
  std::vector<ModelSection> models;  // from the first run
  std::vector<Overlap> overlap;
  RestrictedComparison restricted;
  std::optional<AgreementReport> agreement;
  std::optional<BoundaryReport> boundary;
  /// model name -> metric name -> spread across runs
  std::map<std::string, std::map<std::string, MetricSpread>> across_runs;

  std::string to_json_text() const;
  /// Writes report.json and the CSV files; returns the paths written.
  std::vector<std::filesystem::path> write(const std::filesystem::path& dir) const;
};

struct AgreementInput {
  std::vector<std::string> words;
  sgns::SubwordFn morph_tokens;
  sgns::SubwordFn bpe_tokens;
};

struct BoundaryInput {
  std::vector<AnnotatedWord> gold;
  sgns::SubwordFn segment;
};

/// `runs[r]` holds the models of run r, same names in the same order in every run.
EvaluationReport evaluate(const std::vector<UniMorphEntry>& entries,
                          const std::vector<std::vector<EvalModel>>& runs,
                          const std::optional<AgreementInput>& agreement,
                          const std::optional<BoundaryInput>& boundary, const EvalOptions& opts);

}  // namespace morphtok::eval
