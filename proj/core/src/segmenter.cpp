#include "morphtok/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace morphtok::seg {

CharVocab::CharVocab(std::vector<Codepoint> chars) : chars_(std::move(chars)) {
  std::sort(chars_.begin(), chars_.end());
  chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
}

CharVocab CharVocab::build(std::span<const AnnotatedWord> words) {
  std::vector<Codepoint> cps;
  for (const auto& w : words) {
    for (Codepoint cp : decode_utf8(w.surface)) cps.push_back(cp);
  }
  return CharVocab(std::move(cps));
}

int CharVocab::id(Codepoint cp) const {
  auto it = std::lower_bound(chars_.begin(), chars_.end(), cp);
  if (it == chars_.end() || *it != cp) return kUnk;
  return static_cast<int>(it - chars_.begin()) + 2;
}

Codepoint CharVocab::codepoint(int id) const {
  if (id < 2 || id >= size()) return 0xFFFD;
  return chars_[static_cast<std::size_t>(id - 2)];
}

std::vector<int> CharVocab::encode(std::string_view word) const {
  std::vector<int> ids;
  for (Codepoint cp : decode_utf8(word)) ids.push_back(id(cp));
  return ids;
}

namespace {

LstmDirection zero_direction(int in, int h) {
  return {Matrix::Zero(4 * h, in), Matrix::Zero(4 * h, h), Vector::Zero(4 * h)};
}

int layer_input(const ModelShape& s, int layer) { return layer == 0 ? s.char_dim : 2 * s.hidden; }

void fill_uniform(std::span<double> v, double bound, Rng& rng) {
  for (double& x : v) x = rng.uniform(-bound, bound);
}

std::span<double> span_of(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> span_of(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

SegmenterParams SegmenterParams::zeros(const ModelShape& s, double dropout) {
  if (s.vocab_size < 2 || s.char_dim < 1 || s.hidden < 1 || s.layers < 1 || s.labels < 1) {
    throw std::invalid_argument("segmenter: invalid model shape");
  }
  SegmenterParams p;
  p.shape = s;
  p.dropout = dropout;
  p.char_embed = Matrix::Zero(s.vocab_size, s.char_dim);
  for (int l = 0; l < s.layers; ++l) {
    const int in = layer_input(s, l);
    p.layers.push_back({zero_direction(in, s.hidden), zero_direction(in, s.hidden)});
  }
  p.proj_w = Matrix::Zero(2 * s.hidden, s.labels);
  p.proj_b = Vector::Zero(s.labels);
  p.transitions = crf::Transitions::zeros(s.labels);
  return p;
}

SegmenterParams SegmenterParams::random(const ModelShape& s, double dropout, Rng& rng) {
  SegmenterParams p = zeros(s, dropout);
  fill_uniform(span_of(p.char_embed), 0.5, rng);
  p.char_embed.row(CharVocab::kPad).setZero();
  const double k = 1.0 / std::sqrt(static_cast<double>(s.hidden));
  for (auto& layer : p.layers) {
    for (LstmDirection* d : {&layer.fwd, &layer.bwd}) {
      fill_uniform(span_of(d->w_ih), k, rng);
      fill_uniform(span_of(d->w_hh), k, rng);
      fill_uniform(span_of(d->bias), k, rng);
      d->bias.segment(s.hidden, s.hidden).array() += 1.0;
    }
  }
  fill_uniform(span_of(p.proj_w), 1.0 / std::sqrt(2.0 * s.hidden), rng);
  return p;
}

bool SegmenterParams::all_finite() const {
  auto& self = const_cast<SegmenterParams&>(*this);
  for (const auto& t : tensors(self)) {
    for (double v : t.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::vector<TensorView> tensors(SegmenterParams& p) {
  std::vector<TensorView> out;
  out.push_back({"char_embed", span_of(p.char_embed)});
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string base = "lstm." + std::to_string(l) + ".";
    for (auto [dir, d] : {std::pair{"fwd", &p.layers[l].fwd}, std::pair{"bwd", &p.layers[l].bwd}}) {
      out.push_back({base + dir + ".w_ih", span_of(d->w_ih)});
      out.push_back({base + dir + ".w_hh", span_of(d->w_hh)});
      out.push_back({base + dir + ".bias", span_of(d->bias)});
    }
  }
  out.push_back({"proj_w", span_of(p.proj_w)});
  out.push_back({"proj_b", span_of(p.proj_b)});
  out.push_back({"crf.pairwise", span_of(p.transitions.pairwise)});
  out.push_back({"crf.start", span_of(p.transitions.start)});
  out.push_back({"crf.stop", span_of(p.transitions.stop)});
  return out;
}

std::size_t parameter_count(const SegmenterParams& p) {
  std::size_t n = 0;
  for (const auto& t : tensors(const_cast<SegmenterParams&>(p))) n += t.values.size();
  return n;
}

namespace {

struct DirectionCache {
  Matrix gates;  // n x 4h, post-activation [i f g o]
  Matrix cell;   // n x h
  Matrix tanh_cell;
  Matrix hidden;  // n x h
};

struct LayerCache {
  Matrix input;  // n x in (after dropout)
  DirectionCache fwd;
  DirectionCache bwd;
  Matrix output;        // n x 2h
  Matrix dropout_mask;  // n x 2h, scaling applied to output before the next layer; empty if none
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Matrix emissions;
};

void run_direction(const Matrix& input, const LstmDirection& d, int h, bool reverse,
                   DirectionCache& c) {
  const Eigen::Index n = input.rows();
  const Matrix pre = input * d.w_ih.transpose();  // n x 4h
  c.gates.resize(n, 4 * h);
  c.cell.resize(n, h);
  c.tanh_cell.resize(n, h);
  c.hidden.resize(n, h);
  Vector h_prev = Vector::Zero(h), c_prev = Vector::Zero(h);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    Vector z = pre.row(t).transpose() + d.w_hh * h_prev + d.bias;
    for (int k = 0; k < h; ++k) {
      z(k) = sigmoid(z(k));
      z(h + k) = sigmoid(z(h + k));
      z(2 * h + k) = std::tanh(z(2 * h + k));
      z(3 * h + k) = sigmoid(z(3 * h + k));
    }
    Vector cell = z.segment(h, h).cwiseProduct(c_prev) + z.segment(0, h).cwiseProduct(z.segment(2 * h, h));
    Vector tc = cell.array().tanh().matrix();
    Vector hid = z.segment(3 * h, h).cwiseProduct(tc);
    c.gates.row(t) = z.transpose();
    c.cell.row(t) = cell.transpose();
    c.tanh_cell.row(t) = tc.transpose();
    c.hidden.row(t) = hid.transpose();
    h_prev = std::move(hid);
    c_prev = std::move(cell);
  }
}

ForwardCache forward(std::span<const int> ids, const SegmenterParams& p, Rng* dropout_rng) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (n == 0) throw std::invalid_argument("segmenter: empty input");
  const int h = p.shape.hidden;
  ForwardCache fc;
  fc.layers.resize(p.layers.size());
  Matrix x(n, p.shape.char_dim);
  for (Eigen::Index t = 0; t < n; ++t) {
    const int id = ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= p.shape.vocab_size) throw std::out_of_range("segmenter: char id out of range");
    x.row(t) = p.char_embed.row(id);
  }
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    LayerCache& lc = fc.layers[l];
    lc.input = std::move(x);
    run_direction(lc.input, p.layers[l].fwd, h, false, lc.fwd);
    run_direction(lc.input, p.layers[l].bwd, h, true, lc.bwd);
    lc.output.resize(n, 2 * h);
    lc.output.leftCols(h) = lc.fwd.hidden;
    lc.output.rightCols(h) = lc.bwd.hidden;
    x = lc.output;
    const bool last = l + 1 == p.layers.size();
    if (!last && dropout_rng && p.dropout > 0.0) {
      const double keep = 1.0 - p.dropout;
      lc.dropout_mask.resize(n, 2 * h);
      for (Eigen::Index i = 0; i < lc.dropout_mask.size(); ++i) {
        lc.dropout_mask.data()[i] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
      }
      x = x.cwiseProduct(lc.dropout_mask);
    }
  }
  fc.emissions = x * p.proj_w;
  fc.emissions.rowwise() += p.proj_b.transpose();
  return fc;
}

// Backpropagates d_out (n x h) through one direction; returns d_input (n x in).
Matrix backprop_direction(const Matrix& input, const DirectionCache& c, const LstmDirection& d,
                          LstmDirection& g, const Matrix& d_out, int h, bool reverse) {
  const Eigen::Index n = input.rows();
  Matrix dz_all(n, 4 * h);
  Matrix h_prev_all = Matrix::Zero(n, h);
  Vector dh_next = Vector::Zero(h), dc_next = Vector::Zero(h);
  for (Eigen::Index s = n - 1; s >= 0; --s) {
    const Eigen::Index t = reverse ? n - 1 - s : s;
    const bool has_prev = s > 0;
    const Eigen::Index tp = reverse ? t + 1 : t - 1;
    const auto i = c.gates.row(t).segment(0, h).transpose();
    const auto f = c.gates.row(t).segment(h, h).transpose();
    const auto gg = c.gates.row(t).segment(2 * h, h).transpose();
    const auto o = c.gates.row(t).segment(3 * h, h).transpose();
    const auto tc = c.tanh_cell.row(t).transpose();
    Vector c_prev = has_prev ? Vector(c.cell.row(tp).transpose()) : Vector::Zero(h);
    if (has_prev) h_prev_all.row(t) = c.hidden.row(tp);

    Vector dh = d_out.row(t).transpose() + dh_next;
    Vector d_o = dh.cwiseProduct(tc);
    Vector dc = dc_next + dh.cwiseProduct(o).cwiseProduct((1.0 - tc.array().square()).matrix());
    Vector d_i = dc.cwiseProduct(gg);
    Vector d_g = dc.cwiseProduct(i);
    Vector d_f = dc.cwiseProduct(c_prev);

    Vector dz(4 * h);
    dz.segment(0, h) = (d_i.array() * i.array() * (1.0 - i.array())).matrix();
    dz.segment(h, h) = (d_f.array() * f.array() * (1.0 - f.array())).matrix();
    dz.segment(2 * h, h) = (d_g.array() * (1.0 - gg.array().square())).matrix();
    dz.segment(3 * h, h) = (d_o.array() * o.array() * (1.0 - o.array())).matrix();
    dz_all.row(t) = dz.transpose();

    dh_next = d.w_hh.transpose() * dz;
    dc_next = dc.cwiseProduct(f);
  }
  g.w_ih.noalias() += dz_all.transpose() * input;
  g.w_hh.noalias() += dz_all.transpose() * h_prev_all;
  g.bias += dz_all.colwise().sum().transpose();
  return dz_all * d.w_ih;
}

void backward(std::span<const int> ids, const ForwardCache& fc, const SegmenterParams& p,
              const Matrix& d_emissions, SegmenterParams& g) {
  const int h = p.shape.hidden;
  const LayerCache& top = fc.layers.back();
  g.proj_w.noalias() += top.output.transpose() * d_emissions;
  g.proj_b += d_emissions.colwise().sum().transpose();
  Matrix d_out = d_emissions * p.proj_w.transpose();  // n x 2h
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const LayerCache& lc = fc.layers[l];
    Matrix d_in = backprop_direction(lc.input, lc.fwd, p.layers[l].fwd, g.layers[l].fwd,
                                     d_out.leftCols(h), h, false);
    d_in += backprop_direction(lc.input, lc.bwd, p.layers[l].bwd, g.layers[l].bwd,
                               d_out.rightCols(h), h, true);
    if (l > 0) {
      const LayerCache& below = fc.layers[l - 1];
      d_out = below.dropout_mask.size() ? Matrix(d_in.cwiseProduct(below.dropout_mask)) : d_in;
    } else {
      for (Eigen::Index t = 0; t < d_in.rows(); ++t) {
        g.char_embed.row(ids[static_cast<std::size_t>(t)]) += d_in.row(t);
      }
    }
  }
}

}  // namespace

Matrix bilstm_emissions(std::span<const int> ids, const SegmenterParams& params, Rng* dropout_rng) {
  return forward(ids, params, dropout_rng).emissions;
}

double loss_and_gradient(std::span<const int> ids, std::span<const int> labels,
                         const SegmenterParams& params, SegmenterParams& grad, Rng* dropout_rng) {
  if (ids.size() != labels.size()) throw std::invalid_argument("segmenter: label length mismatch");
  const ForwardCache fc = forward(ids, params, dropout_rng);
  crf::NllGradient cg = crf::nll_gradient(fc.emissions, labels, params.transitions);
  grad.transitions.pairwise += cg.transitions.pairwise;
  grad.transitions.start += cg.transitions.start;
  grad.transitions.stop += cg.transitions.stop;
  backward(ids, fc, params, cg.emissions, grad);
  return cg.nll;
}

double negative_log_likelihood(std::span<const int> ids, std::span<const int> labels,
                               const SegmenterParams& params) {
  const Matrix em = bilstm_emissions(ids, params);
  return -crf::log_likelihood(em, labels, params.transitions);
}

GradientCheckReport gradient_check(const SegmenterParams& params, const CharVocab& vocab,
                                   const AnnotatedWord& word, LabelScheme scheme,
                                   const GradientCheckOptions& opts) {
  const std::vector<int> ids = vocab.encode(word.surface);
  const std::vector<int> labels = boundary_labels(word, scheme);

  SegmenterParams analytic = SegmenterParams::zeros(params.shape, params.dropout);
  loss_and_gradient(ids, labels, params, analytic, nullptr);

  SegmenterParams probe = params;
  auto probe_views = tensors(probe);
  auto grad_views = tensors(analytic);
  Rng rng(opts.seed);
  GradientCheckReport report;
  for (std::size_t k = 0; k < probe_views.size(); ++k) {
    auto values = probe_views[k].values;
    const std::size_t size = values.size();
    std::vector<std::size_t> picks;
    if (size <= opts.samples_per_tensor) {
      for (std::size_t i = 0; i < size; ++i) picks.push_back(i);
    } else {
      // Embedding rows for characters absent from the word have zero gradient;
      // sample the char_embed tensor from rows the word touches.
      const bool embed = probe_views[k].name == "char_embed";
      while (picks.size() < opts.samples_per_tensor) {
        std::size_t idx;
        if (embed) {
          const auto d = static_cast<std::size_t>(params.shape.char_dim);
          idx = static_cast<std::size_t>(ids[rng.below(ids.size())]) * d + rng.below(d);
        } else {
          idx = rng.below(size);
        }
        picks.push_back(idx);
      }
    }
    for (std::size_t idx : picks) {
      const double orig = values[idx];
      values[idx] = orig + opts.step;
      const double up = negative_log_likelihood(ids, labels, probe);
      values[idx] = orig - opts.step;
      const double down = negative_log_likelihood(ids, labels, probe);
      values[idx] = orig;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = grad_views[k].values[idx];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.relative_floor});
      report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
      report.max_relative_error = std::max(report.max_relative_error, abs_err / denom);
      ++report.entries_checked;
    }
    report.tensors_checked.push_back(probe_views[k].name);
  }
  return report;
}

Segmentation segment_word_scored(std::string_view word, const SegmenterModel& model) {
  Segmentation s;
  const std::vector<std::string> chars = split_chars(word);
  if (chars.empty()) return s;
  const std::vector<int> ids = model.vocab.encode(word);
  const Matrix em = bilstm_emissions(ids, model.params);
  crf::ViterbiResult v = crf::viterbi(em, model.params.transitions);
  s.morphemes = labels_to_morphemes(chars, v.labels, model.scheme);
  s.labels = std::move(v.labels);
  s.viterbi_score = v.score;
  return s;
}

std::vector<std::string> segment_word(std::string_view word, const SegmenterModel& model) {
  return segment_word_scored(word, model).morphemes;
}

}  // namespace morphtok::seg
