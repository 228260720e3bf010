#include "morphtok/sgns.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "morphtok/utf8.hpp"

namespace morphtok::sgns {

std::string_view kind_name(TokenizerKind k) {
  switch (k) {
    case TokenizerKind::kWord: return "word";
    case TokenizerKind::kMorpheme: return "morpheme";
    case TokenizerKind::kBpe: return "bpe";
  }
  return "word";
}

TokenizerKind parse_kind(std::string_view name) {
  if (name == "word") return TokenizerKind::kWord;
  if (name == "morpheme" || name == "morph") return TokenizerKind::kMorpheme;
  if (name == "bpe") return TokenizerKind::kBpe;
  throw std::invalid_argument("unknown tokenizer kind '" + std::string(name) + "'");
}

std::string_view source_name(VectorSource s) {
  switch (s) {
    case VectorSource::kVocab: return "vocab";
    case VectorSource::kCompositional: return "compositional";
    case VectorSource::kUncovered: return "uncovered";
  }
  return "uncovered";
}

void SgnsConfig::validate() const {
  if (dim < 1 || base_window < 1 || negatives < 1 || epochs < 1 || min_count < 1 ||
      !(initial_lr > 0.0)) {
    throw std::invalid_argument("sgns: all hyperparameters must be positive");
  }
}

int adjust_window(int base, double avg_tokens_per_word) {
  if (base < 1 || !(avg_tokens_per_word >= 1.0)) {
    throw std::invalid_argument("adjust_window: need base >= 1 and avg >= 1");
  }
  // The epsilon absorbs representation error such as 5 * 1.2 = 6.000000000000001.
  return static_cast<int>(std::ceil(static_cast<double>(base) * avg_tokens_per_word - 1e-9));
}

Vocab::Vocab(std::vector<std::string> tokens, std::vector<std::uint64_t> counts)
    : tokens_(std::move(tokens)), counts_(std::move(counts)) {
  if (tokens_.size() != counts_.size()) throw std::invalid_argument("vocab: size mismatch");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw std::invalid_argument("vocab: duplicate token '" + tokens_[i] + "'");
    }
  }
}

long Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

NegativeSampler::NegativeSampler(const Vocab& vocab, double exponent) {
  probs_.resize(vocab.size());
  double total = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    probs_[i] = std::pow(static_cast<double>(vocab.count(i)), exponent);
    total += probs_[i];
  }
  cumulative_.resize(vocab.size());
  double run = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    probs_[i] /= total;
    run += probs_[i];
    cumulative_[i] = run;
  }
  if (!cumulative_.empty()) cumulative_.back() = 1.0;
}

std::size_t NegativeSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                               cumulative_.size() - 1);
}

VocabBuild build_vocab(const std::vector<Sentence>& corpus, std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& s : corpus) {
    for (const auto& t : s) ++counts[t];
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [t, c] : counts) {
    if (c >= min_count) kept.emplace_back(t, c);
  }
  if (kept.empty()) throw std::runtime_error("empty_vocab: no token reaches min_count");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> toks;
  std::vector<std::uint64_t> cnts;
  for (auto& [t, c] : kept) {
    toks.push_back(t);
    cnts.push_back(c);
  }
  VocabBuild vb{Vocab(std::move(toks), std::move(cnts)), {}};
  vb.sampler = NegativeSampler(vb.vocab);
  return vb;
}

namespace {

struct Worker {
  const std::vector<std::vector<std::size_t>>* sentences;
  const NegativeSampler* sampler;
  EmbeddingModel* model;
  const SgnsConfig* cfg;
  int window;
  std::uint64_t total_pairs;
  std::uint64_t pair_offset;  // pairs scheduled before this worker's share within an epoch

  // Trains sentences [begin, end) for one epoch; returns summed loss and pair count.
  std::pair<double, std::uint64_t> run(std::size_t begin, std::size_t end, int epoch, Rng& rng,
                                       std::uint64_t epoch_pairs) const {
    const int dim = model->dim();
    const int k = cfg->negatives;
    std::vector<float> d_center(static_cast<std::size_t>(dim));
    std::vector<std::vector<float>> d_targets(static_cast<std::size_t>(k + 1),
                                              std::vector<float>(static_cast<std::size_t>(dim)));
    std::vector<std::size_t> target_ids;
    std::vector<int> labels;
    double loss = 0.0;
    std::uint64_t done = static_cast<std::uint64_t>(epoch) * epoch_pairs + pair_offset;
    std::uint64_t pairs = 0;
    const double lr0 = cfg->initial_lr;
    for (std::size_t si = begin; si < end; ++si) {
      const auto& s = (*sentences)[si];
      const auto n = static_cast<long>(s.size());
      for (long i = 0; i < n; ++i) {
        const long lo = std::max(0L, i - window), hi = std::min(n - 1, i + window);
        for (long j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const double progress = static_cast<double>(done) / static_cast<double>(total_pairs);
          const auto lr = static_cast<float>(lr0 - (lr0 - lr0 / 100.0) * std::min(1.0, progress));
          const std::size_t center = s[static_cast<std::size_t>(i)];
          const std::size_t context = s[static_cast<std::size_t>(j)];
          target_ids.assign(1, context);
          labels.assign(1, 1);
          for (int q = 0; q < k; ++q) {
            const std::size_t neg = sampler->sample(rng);
            if (neg == context) continue;
            target_ids.push_back(neg);
            labels.push_back(0);
          }
          std::span<const float> v(model->input.row(static_cast<Eigen::Index>(center)).data(),
                                   static_cast<std::size_t>(dim));
          std::vector<std::span<const float>> us;
          std::vector<std::span<float>> dus;
          for (std::size_t t = 0; t < target_ids.size(); ++t) {
            us.emplace_back(model->output.row(static_cast<Eigen::Index>(target_ids[t])).data(),
                            static_cast<std::size_t>(dim));
            dus.emplace_back(d_targets[t].data(), static_cast<std::size_t>(dim));
          }
          loss += static_cast<double>(pair_loss<float>(v, us, labels));
          pair_gradient<float>(v, us, labels, d_center, dus);
          for (std::size_t t = 0; t < target_ids.size(); ++t) {
            float* u = model->output.row(static_cast<Eigen::Index>(target_ids[t])).data();
            for (int d = 0; d < dim; ++d) u[d] -= lr * d_targets[t][static_cast<std::size_t>(d)];
          }
          float* vin = model->input.row(static_cast<Eigen::Index>(center)).data();
          for (int d = 0; d < dim; ++d) vin[d] -= lr * d_center[static_cast<std::size_t>(d)];
          ++done;
          ++pairs;
        }
      }
    }
    return {loss, pairs};
  }
};

std::uint64_t count_pairs(const std::vector<std::size_t>& s, int window) {
  std::uint64_t total = 0;
  const auto n = static_cast<long>(s.size());
  for (long i = 0; i < n; ++i) {
    total += static_cast<std::uint64_t>(std::min(n - 1, i + window) - std::max(0L, i - window));
  }
  return total;
}

}  // namespace

EmbeddingModel train_sgns(const std::vector<Sentence>& corpus, const SgnsConfig& cfg, int window,
                          TokenizerKind kind, double avg_tokens_per_word, SgnsTrainLog* log) {
  cfg.validate();
  if (window < 1) throw std::invalid_argument("sgns: window must be >= 1");
  VocabBuild vb = build_vocab(corpus, cfg.min_count);

  std::vector<std::vector<std::size_t>> ids;
  ids.reserve(corpus.size());
  for (const auto& s : corpus) {
    std::vector<std::size_t> row;
    for (const auto& t : s) {
      const long id = vb.vocab.find(t);
      if (id >= 0) row.push_back(static_cast<std::size_t>(id));
    }
    if (row.size() > 1) ids.push_back(std::move(row));
  }

  EmbeddingModel model;
  model.kind = kind;
  model.adjusted_window = window;
  model.avg_tokens_per_word = avg_tokens_per_word;
  const auto V = static_cast<Eigen::Index>(vb.vocab.size());
  model.input.resize(V, cfg.dim);
  model.output = MatrixF::Zero(V, cfg.dim);
  Rng init(derive_seed(cfg.seed, "sgns.init"));
  for (Eigen::Index i = 0; i < model.input.size(); ++i) {
    model.input.data()[i] = static_cast<float>((init.uniform() - 0.5) / cfg.dim);
  }
  model.vocab = std::move(vb.vocab);

  std::uint64_t epoch_pairs = 0;
  std::vector<std::uint64_t> sentence_pairs(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    sentence_pairs[i] = count_pairs(ids[i], window);
    epoch_pairs += sentence_pairs[i];
  }
  const std::uint64_t total = std::max<std::uint64_t>(1, epoch_pairs * static_cast<std::uint64_t>(cfg.epochs));
  if (log) {
    log->epoch_loss.clear();
    log->total_pairs = epoch_pairs * static_cast<std::uint64_t>(cfg.epochs);
  }

  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(std::max<std::size_t>(1, ids.size()))));
  std::vector<std::size_t> bounds{0};
  std::vector<std::uint64_t> offsets{0};
  {
    std::uint64_t acc = 0;
    const std::size_t per = (ids.size() + threads - 1) / threads;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      acc += sentence_pairs[i];
      if ((i + 1) % per == 0 && i + 1 < ids.size()) {
        bounds.push_back(i + 1);
        offsets.push_back(acc);
      }
    }
    bounds.push_back(ids.size());
  }

  std::vector<Rng> rngs;
  for (std::size_t t = 0; t + 1 < bounds.size(); ++t) {
    rngs.emplace_back(derive_seed(cfg.seed, "sgns.worker." + std::to_string(t)));
  }
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0.0;
    std::uint64_t pairs = 0;
    if (rngs.size() == 1) {
      Worker w{&ids, &vb.sampler, &model, &cfg, window, total, 0};
      std::tie(loss, pairs) = w.run(0, ids.size(), epoch, rngs[0], epoch_pairs);
    } else {
      std::vector<std::pair<double, std::uint64_t>> parts(rngs.size());
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < rngs.size(); ++t) {
        pool.emplace_back([&, t] {
          Worker w{&ids, &vb.sampler, &model, &cfg, window, total, offsets[t]};
          parts[t] = w.run(bounds[t], bounds[t + 1], epoch, rngs[t], epoch_pairs);
        });
      }
      for (auto& th : pool) th.join();
      for (auto& [l, p] : parts) {
        loss += l;
        pairs += p;
      }
    }
    if (log) log->epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }
  return model;
}

ResolvedVector vector_for(std::string_view word, const EmbeddingModel& model,
                          const SubwordFn& subwords) {
  ResolvedVector r;
  const int dim = model.dim();
  const long id = model.vocab.find(word);
  if (id >= 0) {
    r.source = VectorSource::kVocab;
    r.values.resize(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) r.values[static_cast<std::size_t>(d)] = model.input(id, d);
    return r;
  }
  if (model.kind == TokenizerKind::kWord || !subwords) return r;
  std::vector<double> sum(static_cast<std::size_t>(dim), 0.0);
  std::size_t used = 0;
  for (const auto& piece : subwords(word)) {
    const long pid = model.vocab.find(piece);
    if (pid < 0) continue;
    for (int d = 0; d < dim; ++d) sum[static_cast<std::size_t>(d)] += model.input(pid, d);
    ++used;
  }
  if (used == 0) return r;
  for (double& x : sum) x /= static_cast<double>(used);
  for (double x : sum) {
    if (!std::isfinite(x)) return r;
  }
  r.source = VectorSource::kCompositional;
  r.values = std::move(sum);
  return r;
}

std::vector<Sentence> read_corpus(std::istream& in) {
  std::vector<Sentence> out;
  for (std::string line; std::getline(in, line);) {
    auto toks = split_whitespace(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

std::vector<Sentence> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus " + path.string());
  return read_corpus(in);
}

namespace {

void put_f32(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
}

float get_f32(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int k = 3; k >= 0; --k) bits = (bits << 8) | p[k];
  return std::bit_cast<float>(bits);
}

std::string take_line(std::string_view bytes, std::size_t& pos) {
  const auto nl = bytes.find('\n', pos);
  if (nl == std::string_view::npos) throw std::runtime_error("MTVEC file truncated");
  std::string line(bytes.substr(pos, nl - pos));
  pos = nl + 1;
  return line;
}

}  // namespace

std::string serialize_model(const EmbeddingModel& m) {
  std::ostringstream head;
  head << "MTVEC 1\n"
       << "dim=" << m.dim() << " vocab=" << m.vocab.size() << " tokenizer=" << kind_name(m.kind)
       << " window=" << m.adjusted_window << " avg_tokens=" << std::setprecision(17)
       << m.avg_tokens_per_word << "\n";
  for (std::size_t i = 0; i < m.vocab.size(); ++i) {
    head << m.vocab.token(i) << '\t' << m.vocab.count(i) << '\n';
  }
  std::string out = head.str();
  out.reserve(out.size() + 8 * static_cast<std::size_t>(m.input.size()));
  for (Eigen::Index i = 0; i < m.input.size(); ++i) put_f32(out, m.input.data()[i]);
  for (Eigen::Index i = 0; i < m.output.size(); ++i) put_f32(out, m.output.data()[i]);
  return out;
}

EmbeddingModel deserialize_model(std::string_view bytes) {
  std::size_t pos = 0;
  if (take_line(bytes, pos) != "MTVEC 1") throw std::runtime_error("not an MTVEC v1 model");
  std::map<std::string, std::string> f;
  for (const auto& tok : split_whitespace(take_line(bytes, pos))) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error("MTVEC header: bad field " + tok);
    f[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"dim", "vocab", "tokenizer", "window", "avg_tokens"}) {
    if (!f.count(key)) throw std::runtime_error(std::string("MTVEC header missing ") + key);
  }
  EmbeddingModel m;
  const int dim = std::stoi(f["dim"]);
  const std::size_t n = std::stoul(f["vocab"]);
  m.kind = parse_kind(f["tokenizer"]);
  m.adjusted_window = std::stoi(f["window"]);
  m.avg_tokens_per_word = std::stod(f["avg_tokens"]);
  std::vector<std::string> toks;
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string line = take_line(bytes, pos);
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw std::runtime_error("MTVEC vocab line malformed");
    toks.push_back(line.substr(0, tab));
    counts.push_back(std::stoull(line.substr(tab + 1)));
  }
  m.vocab = Vocab(std::move(toks), std::move(counts));
  const std::size_t cells = n * static_cast<std::size_t>(dim);
  if (bytes.size() < pos + 8 * cells) throw std::runtime_error("MTVEC matrices truncated");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  m.input.resize(static_cast<Eigen::Index>(n), dim);
  m.output.resize(static_cast<Eigen::Index>(n), dim);
  for (std::size_t i = 0; i < cells; ++i, p += 4) m.input.data()[i] = get_f32(p);
  for (std::size_t i = 0; i < cells; ++i, p += 4) m.output.data()[i] = get_f32(p);
  if (!m.input.allFinite() || !m.output.allFinite()) throw std::runtime_error("MTVEC: non-finite values");
  return m;
}

void save_model(const std::filesystem::path& path, const EmbeddingModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

EmbeddingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace morphtok::sgns
