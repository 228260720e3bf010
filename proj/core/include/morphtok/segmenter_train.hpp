#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "morphtok/labels.hpp"
#include "morphtok/segmenter.hpp"

namespace morphtok::seg {

struct TrainConfig {
  int hidden_size = 256;
  int num_layers = 3;
  double dropout = 0.3;
  double lr = 0.001;
  double weight_decay = 1e-5;
  int patience = 10;
  std::uint64_t seed = 42;
  int char_dim = 64;
  double val_fraction = 0.1;
  int max_epochs = 200;
  // Adam moments.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean NLL per word
  double val_f1 = 0.0;
  double val_precision = 0.0;
  double val_recall = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_f1 = 0.0;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  bool early_stopped = false;

  std::string to_json_text() const;
};

struct TrainResult {
  SegmenterModel model;
  TrainLog log;
};

/// Boundary statistics over interior cut positions only.
struct BoundaryCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision() const;
  double recall() const;
  double f1() const;
};

BoundaryCounts count_boundaries(const std::vector<std::string>& gold,
                                const std::vector<std::string>& predicted);

/// Seeded train/validation split; validation gets round(val_fraction * n), at least 1.
void split_train_val(std::vector<AnnotatedWord> data, double val_fraction, std::uint64_t seed,
                     std::vector<AnnotatedWord>& train, std::vector<AnnotatedWord>& val);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains with Adam and decoupled weight decay, one word per update, and early
/// stopping on validation boundary F1. Returns the best-epoch parameters.
TrainResult train_segmenter(const std::vector<AnnotatedWord>& data, LabelScheme scheme,
                            const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace morphtok::seg
