#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "morphtok/bpe.hpp"
#include "morphtok/labels.hpp"
#include "morphtok/report.hpp"
#include "morphtok/segmenter_train.hpp"
#include "morphtok/sgns.hpp"
#include "morphtok/textnorm.hpp"

namespace morphtok {

inline constexpr std::string_view kToolkitVersion = "0.3.0";
inline constexpr int kPipelineSchemaVersion = 1;

/// Failure inside a named stage. what() reads "[stage] cause".
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause)
      : std::runtime_error("[" + stage + "] " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct SyntheticInput {
  std::string grammar;  // path
  std::size_t words = 500;
  std::size_t sentences = 5000;
  std::size_t gold = 200;
};

struct PipelineInputs {
  std::optional<SyntheticInput> synthetic;
  std::string corpus;       // raw text; ignored with synthetic input
  std::string annotations;  // segmenter training data
  std::string unimorph;
  std::string gold;         // optional held-out segmentations
  textnorm::InputMode mode = textnorm::InputMode::kLine;
};

struct PipelineConfig {
  std::string name = "run";
  std::uint64_t seed = 42;
  std::string output_dir = "run";
  std::string toolkit_version = std::string(kToolkitVersion);
  std::string timestamp = "auto";  // "auto" stamps the current UTC time into the manifest
  PipelineInputs inputs;
  textnorm::NormalizationConfig textnorm = textnorm::default_config();
  LabelScheme scheme = LabelScheme::kEndOnly;
  seg::TrainConfig segmenter;
  bpe::BpeConfig bpe;
  sgns::SgnsConfig sgns;
  std::vector<sgns::TokenizerKind> tokenizers{sgns::TokenizerKind::kWord, sgns::TokenizerKind::kMorpheme,
                                              sgns::TokenizerKind::kBpe};
  eval::EvalOptions eval;
  std::size_t runs = 1;
  std::vector<std::string> stages;  // empty = every stage
  /// Directory relative paths are resolved against; not serialized.
  std::filesystem::path base_dir = ".";

  std::filesystem::path resolve(const std::string& p) const;
  /// Stage seeds are derived from the global seed and the stage name.
  std::uint64_t stage_seed(std::string_view stage) const;
};

/// All stage names in execution order.
const std::vector<std::string>& pipeline_stages();

PipelineConfig pipeline_config_from_json_text(std::string_view text,
                                              const std::filesystem::path& base_dir = ".");
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
/// Canonical form: every field written, defaults included.
std::string pipeline_config_to_json_text(const PipelineConfig& cfg);

/// Checks that every referenced input exists. Throws StageError("config", ...).
void validate_inputs(const PipelineConfig& cfg);

struct Artifact {
  std::string path;  // relative to the run directory
  std::string stage;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct PipelineResult {
  std::filesystem::path run_dir;
  std::filesystem::path manifest;
  std::vector<Artifact> artifacts;
};

/// Runs the configured stages. `out_dir` overrides the configured output directory.
PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Applies `fn` to every token, caching per distinct word.
std::vector<sgns::Sentence> tokenize_corpus(const std::vector<sgns::Sentence>& corpus,
                                            const sgns::SubwordFn& fn);
void write_corpus(const std::filesystem::path& path, const std::vector<sgns::Sentence>& corpus);

/// Mean tokens per word of a tokenized corpus against its word-level source,
/// line by line.
double tokens_per_word(const std::vector<sgns::Sentence>& words,
                       const std::vector<sgns::Sentence>& tokens);

}  // namespace morphtok
