#include "morphtok/segmenter_train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace morphtok::seg {

void TrainConfig::validate() const {
  if (hidden_size < 1 || num_layers < 1 || char_dim < 1 || patience < 1 || max_epochs < 1) {
    throw std::invalid_argument("segmenter: sizes, patience and epochs must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0,1)");
  if (!(lr > 0.0) || weight_decay < 0.0) throw std::invalid_argument("bad lr / weight_decay");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("val_fraction must be in (0,1)");
  }
}

double BoundaryCounts::precision() const {
  return tp + fp == 0 ? (fn == 0 ? 1.0 : 0.0) : static_cast<double>(tp) / (tp + fp);
}
double BoundaryCounts::recall() const {
  return tp + fn == 0 ? (fp == 0 ? 1.0 : 0.0) : static_cast<double>(tp) / (tp + fn);
}
double BoundaryCounts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

BoundaryCounts count_boundaries(const std::vector<std::string>& gold,
                                const std::vector<std::string>& predicted) {
  const auto g = interior_cuts(gold);
  const auto p = interior_cuts(predicted);
  BoundaryCounts c;
  for (int cut : p) (g.count(cut) ? c.tp : c.fp)++;
  for (int cut : g) {
    if (!p.count(cut)) ++c.fn;
  }
  return c;
}

void split_train_val(std::vector<AnnotatedWord> data, double val_fraction, std::uint64_t seed,
                     std::vector<AnnotatedWord>& train, std::vector<AnnotatedWord>& val) {
  Rng rng(seed);
  rng.shuffle(data);
  auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(data.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, data.size());
  val.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n_val));
  train.assign(data.begin() + static_cast<std::ptrdiff_t>(n_val), data.end());
}

namespace {

struct AdamState {
  std::vector<std::vector<double>> m, v;
  long step = 0;
};

void adam_update(SegmenterParams& params, SegmenterParams& grad, AdamState& st,
                 const TrainConfig& cfg) {
  auto pv = tensors(params);
  auto gv = tensors(grad);
  if (st.m.empty()) {
    for (const auto& t : pv) {
      st.m.emplace_back(t.values.size(), 0.0);
      st.v.emplace_back(t.values.size(), 0.0);
    }
  }
  ++st.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  for (std::size_t k = 0; k < pv.size(); ++k) {
    auto w = pv[k].values;
    auto g = gv[k].values;
    auto& m = st.m[k];
    auto& v = st.v[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      w[i] -= cfg.lr * (mh / (std::sqrt(vh) + cfg.epsilon) + cfg.weight_decay * w[i]);
      g[i] = 0.0;
    }
  }
}

BoundaryCounts evaluate(const SegmenterModel& model, const std::vector<AnnotatedWord>& words) {
  BoundaryCounts total;
  for (const auto& w : words) {
    const BoundaryCounts c = count_boundaries(w.morphemes, segment_word(w.surface, model));
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return total;
}

}  // namespace

TrainResult train_segmenter(const std::vector<AnnotatedWord>& data, LabelScheme scheme,
                            const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.size() < 2) throw std::invalid_argument("segmenter: need at least 2 annotated words");
  for (const auto& w : data) w.validate();

  std::vector<AnnotatedWord> train, val;
  split_train_val(data, cfg.val_fraction, cfg.seed, train, val);
  if (train.empty()) throw std::invalid_argument("segmenter: training split is empty");

  Rng init_rng(derive_seed(cfg.seed, "segmenter.init"));
  Rng order_rng(derive_seed(cfg.seed, "segmenter.order"));
  Rng dropout_rng(derive_seed(cfg.seed, "segmenter.dropout"));

  SegmenterModel model;
  model.scheme = scheme;
  model.vocab = CharVocab::build(train);
  const ModelShape shape{model.vocab.size(), cfg.char_dim, cfg.hidden_size, cfg.num_layers,
                         kNumLabels};
  model.params = SegmenterParams::random(shape, cfg.dropout, init_rng);

  struct Example {
    std::vector<int> ids, labels;
  };
  std::vector<Example> examples;
  for (const auto& w : train) examples.push_back({model.vocab.encode(w.surface), boundary_labels(w, scheme)});

  TrainResult result;
  result.log.train_size = train.size();
  result.log.val_size = val.size();
  SegmenterParams grad = SegmenterParams::zeros(shape, cfg.dropout);
  SegmenterParams best = model.params;
  AdamState adam;
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  int since_best = 0;
  result.log.best_val_f1 = -1.0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss = 0.0;
    for (std::size_t idx : order) {
      const Example& ex = examples[idx];
      loss += loss_and_gradient(ex.ids, ex.labels, model.params, grad, &dropout_rng);
      adam_update(model.params, grad, adam, cfg);
    }
    if (!model.params.all_finite()) throw std::runtime_error("segmenter: parameters diverged");
    const BoundaryCounts vc = evaluate(model, val);
    EpochRecord rec{epoch, loss / static_cast<double>(examples.size()), vc.f1(), vc.precision(),
                    vc.recall()};
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_f1 > result.log.best_val_f1) {
      result.log.best_val_f1 = rec.val_f1;
      result.log.best_epoch = epoch;
      best = model.params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      result.log.early_stopped = true;
      break;
    }
  }
  model.params = std::move(best);
  result.model = std::move(model);
  return result;
}

std::string TrainLog::to_json_text() const {
  nlohmann::ordered_json j;
  j["train_size"] = train_size;
  j["val_size"] = val_size;
  j["best_epoch"] = best_epoch;
  j["best_val_f1"] = best_val_f1;
  j["early_stopped"] = early_stopped;
  auto& arr = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    arr.push_back({{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"val_f1", e.val_f1},
                   {"val_precision", e.val_precision},
                   {"val_recall", e.val_recall}});
  }
  return j.dump(2) + "\n";
}

}  // namespace morphtok::seg
