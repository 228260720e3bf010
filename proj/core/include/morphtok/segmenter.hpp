#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphtok/crf.hpp"
#include "morphtok/labels.hpp"
#include "morphtok/rng.hpp"
#include "morphtok/utf8.hpp"

namespace morphtok::seg {

using Matrix = crf::Matrix;
using Vector = crf::Vector;

inline constexpr int kNumLabels = 2;

/// Character vocabulary. Ids 0 and 1 are reserved for padding and unknown
/// characters; real characters follow in ascending codepoint order.
class CharVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  CharVocab() = default;
  explicit CharVocab(std::vector<Codepoint> chars);
  static CharVocab build(std::span<const AnnotatedWord> words);

  int id(Codepoint cp) const;
  Codepoint codepoint(int id) const;
  std::vector<int> encode(std::string_view word) const;
  int size() const { return static_cast<int>(chars_.size()) + 2; }
  const std::vector<Codepoint>& chars() const { return chars_; }

  friend bool operator==(const CharVocab&, const CharVocab&) = default;

 private:
  std::vector<Codepoint> chars_;  // sorted, unique
};

struct ModelShape {
  int vocab_size = 0;
  int char_dim = 64;
  int hidden = 256;
  int layers = 3;
  int labels = kNumLabels;
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Gate blocks are stacked [input; forget; cell; output] along the rows.
struct LstmDirection {
  Matrix w_ih;  // 4h x in
  Matrix w_hh;  // 4h x h
  Vector bias;  // 4h
};

struct LstmLayer {
  LstmDirection fwd;
  LstmDirection bwd;
};

struct SegmenterParams {
  ModelShape shape;
  double dropout = 0.0;
  Matrix char_embed;  // |V| x d
  std::vector<LstmLayer> layers;
  Matrix proj_w;  // 2h x L
  Vector proj_b;  // L
  crf::Transitions transitions;

  static SegmenterParams zeros(const ModelShape& shape, double dropout = 0.0);
  /// Uniform(-1/sqrt(h), 1/sqrt(h)) recurrent weights, forget-gate bias 1,
  /// zero transitions.
  static SegmenterParams random(const ModelShape& shape, double dropout, Rng& rng);

  bool all_finite() const;
};

/// A named view of one parameter tensor, in serialization order.
struct TensorView {
  std::string name;
  std::span<double> values;
};

std::vector<TensorView> tensors(SegmenterParams& p);
std::size_t parameter_count(const SegmenterParams& p);

struct SegmenterModel {
  SegmenterParams params;
  CharVocab vocab;
  LabelScheme scheme = LabelScheme::kEndOnly;
};

/// Emission scores (n x L). Dropout between recurrent layers is applied only
/// when `dropout_rng` is non-null.
Matrix bilstm_emissions(std::span<const int> ids, const SegmenterParams& params,
                        Rng* dropout_rng = nullptr);

/// Negative log-likelihood of `labels`; accumulates its gradient into `grad`
/// (which must have the shape of `params`). Pass a dropout RNG for training.
double loss_and_gradient(std::span<const int> ids, std::span<const int> labels,
                         const SegmenterParams& params, SegmenterParams& grad,
                         Rng* dropout_rng = nullptr);

double negative_log_likelihood(std::span<const int> ids, std::span<const int> labels,
                               const SegmenterParams& params);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t entries_checked = 0;
  std::vector<std::string> tensors_checked;
};

struct GradientCheckOptions {
  double step = 1e-5;
  std::size_t samples_per_tensor = 6;
  std::uint64_t seed = 7;
  /// Relative error is |a - n| / max(|a|, |n|, floor); the floor keeps
  /// near-zero gradients from turning rounding noise into large ratios.
  double relative_floor = 1e-5;
};

/// Compares analytic gradients of -log P(y|x) with central differences on a
/// seeded sample of entries from every tensor. Dropout is disabled.
GradientCheckReport gradient_check(const SegmenterParams& params, const CharVocab& vocab,
                                   const AnnotatedWord& word, LabelScheme scheme,
                                   const GradientCheckOptions& opts = {});

struct Segmentation {
  std::vector<std::string> morphemes;
  std::vector<int> labels;
  double viterbi_score = 0.0;
};

Segmentation segment_word_scored(std::string_view word, const SegmenterModel& model);
std::vector<std::string> segment_word(std::string_view word, const SegmenterModel& model);

}  // namespace morphtok::seg
