#include "morphtok/bpe.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "morphtok/utf8.hpp"

namespace morphtok::bpe {
namespace {

std::string pair_key(std::string_view l, std::string_view r) {
  std::string k;
  k.reserve(l.size() + r.size() + 1);
  k.append(l);
  k.push_back('\0');
  k.append(r);
  return k;
}

}  // namespace

BpeModel::BpeModel(std::vector<Merge> merges, std::vector<std::string> alphabet, BpeConfig cfg)
    : merges_(std::move(merges)), alphabet_(std::move(alphabet)), cfg_(cfg) {
  std::sort(alphabet_.begin(), alphabet_.end());
  alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
  for (const auto& a : alphabet_) vocab_[a] = 0;
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    vocab_[merges_[r].merged()];
    ranks_.emplace(pair_key(merges_[r].left, merges_[r].right), static_cast<long>(r));
  }
}

long BpeModel::rank(const std::string& left, const std::string& right) const {
  auto it = ranks_.find(pair_key(left, right));
  return it == ranks_.end() ? -1 : it->second;
}

void BpeModel::set_counts(std::map<std::string, std::uint64_t> counts) {
  for (auto& [tok, c] : counts) {
    auto it = vocab_.find(tok);
    if (it != vocab_.end()) it->second = c;
  }
}

namespace {

using TokenId = std::uint32_t;
using PairId = std::uint64_t;

PairId make_pair_id(TokenId a, TokenId b) { return (static_cast<PairId>(a) << 32) | b; }
TokenId left_of(PairId p) { return static_cast<TokenId>(p >> 32); }
TokenId right_of(PairId p) { return static_cast<TokenId>(p & 0xFFFFFFFFu); }

struct Trainer {
  std::vector<std::string> tokens;  // id -> string
  std::unordered_map<std::string, TokenId> token_ids;
  std::vector<std::vector<TokenId>> words;
  std::vector<std::uint64_t> freqs;
  std::unordered_map<PairId, std::int64_t> counts;
  std::unordered_map<PairId, std::set<std::size_t>> where;

  TokenId intern(const std::string& s) {
    auto [it, inserted] = token_ids.try_emplace(s, static_cast<TokenId>(tokens.size()));
    if (inserted) tokens.push_back(s);
    return it->second;
  }

  // True when pair a sorts before pair b under the tie rule.
  bool tie_less(PairId a, PairId b) const {
    const std::string& al = tokens[left_of(a)];
    const std::string& ar = tokens[right_of(a)];
    const std::string& bl = tokens[left_of(b)];
    const std::string& br = tokens[right_of(b)];
    const std::string ca = al + ar, cb = bl + br;
    if (ca != cb) return ca < cb;
    return al < bl;
  }

  struct HeapEntry {
    std::int64_t count;
    PairId pair;
  };

  struct HeapLess {
    const Trainer* t;
    bool operator()(const HeapEntry& x, const HeapEntry& y) const {
      if (x.count != y.count) return x.count < y.count;
      return t->tie_less(y.pair, x.pair);
    }
  };

  void add_word_pairs(std::size_t w, std::int64_t sign, std::vector<PairId>& touched) {
    const auto& seq = words[w];
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const PairId p = make_pair_id(seq[i], seq[i + 1]);
      counts[p] += sign * static_cast<std::int64_t>(freqs[w]);
      if (sign > 0) where[p].insert(w);
      touched.push_back(p);
    }
  }

  static bool merge_in(std::vector<TokenId>& seq, TokenId a, TokenId b, TokenId c) {
    bool any = false;
    std::vector<TokenId> out;
    out.reserve(seq.size());
    for (std::size_t i = 0; i < seq.size();) {
      if (i + 1 < seq.size() && seq[i] == a && seq[i + 1] == b) {
        out.push_back(c);
        i += 2;
        any = true;
      } else {
        out.push_back(seq[i++]);
      }
    }
    seq = std::move(out);
    return any;
  }
};

}  // namespace

BpeModel train_bpe(const std::vector<WordCount>& input, const BpeConfig& cfg,
                   std::vector<MergeStep>* trace) {
  if (cfg.min_frequency < 1) throw std::invalid_argument("bpe: min_frequency must be >= 1");
  Trainer t;
  std::set<std::string> alphabet;
  for (const auto& wc : input) {
    if (wc.count < 1) throw std::invalid_argument("bpe: word frequencies must be >= 1");
    if (wc.word.empty()) continue;
    std::vector<TokenId> seq;
    for (auto& ch : split_chars(wc.word)) {
      alphabet.insert(ch);
      seq.push_back(t.intern(ch));
    }
    t.words.push_back(std::move(seq));
    t.freqs.push_back(wc.count);
  }

  std::set<std::string> vocab(alphabet.begin(), alphabet.end());
  std::vector<PairId> touched;
  for (std::size_t w = 0; w < t.words.size(); ++w) t.add_word_pairs(w, +1, touched);

  std::priority_queue<Trainer::HeapEntry, std::vector<Trainer::HeapEntry>, Trainer::HeapLess> heap(
      Trainer::HeapLess{&t});
  for (const auto& [p, c] : t.counts) heap.push({c, p});

  std::vector<Merge> merges;
  while (vocab.size() < cfg.vocab_size && !heap.empty()) {
    const Trainer::HeapEntry top = heap.top();
    heap.pop();
    auto it = t.counts.find(top.pair);
    if (it == t.counts.end() || it->second != top.count) continue;  // stale
    if (top.count <= 0 || static_cast<std::uint64_t>(top.count) < cfg.min_frequency) break;

    const TokenId a = left_of(top.pair), b = right_of(top.pair);
    const std::string merged = t.tokens[a] + t.tokens[b];
    const TokenId c = t.intern(merged);
    Merge m{t.tokens[a], t.tokens[b]};
    if (trace) trace->push_back({m, static_cast<std::uint64_t>(top.count)});
    merges.push_back(std::move(m));
    vocab.insert(merged);

    const std::set<std::size_t> affected = std::move(t.where[top.pair]);
    t.where.erase(top.pair);
    touched.clear();
    for (std::size_t w : affected) {
      std::vector<TokenId> next = t.words[w];
      if (!Trainer::merge_in(next, a, b, c)) continue;
      t.add_word_pairs(w, -1, touched);
      t.words[w] = std::move(next);
      t.add_word_pairs(w, +1, touched);
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (PairId p : touched) {
      auto ct = t.counts.find(p);
      if (ct->second > 0) {
        heap.push({ct->second, p});
      } else {
        t.counts.erase(ct);
      }
    }
  }

  BpeModel model(std::move(merges), std::vector<std::string>(alphabet.begin(), alphabet.end()), cfg);
  std::map<std::string, std::uint64_t> counts;
  for (std::size_t w = 0; w < t.words.size(); ++w) {
    for (TokenId id : t.words[w]) counts[t.tokens[id]] += t.freqs[w];
  }
  model.set_counts(std::move(counts));
  return model;
}

std::vector<std::string> bpe_encode(std::string_view word, const BpeModel& model) {
  std::vector<std::string> sym = split_chars(word);
  long last = -1;
  while (sym.size() > 1) {
    long best = -1;
    for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
      const long r = model.rank(sym[i], sym[i + 1]);
      if (r > last && (best < 0 || r < best)) best = r;
    }
    if (best < 0) break;
    const Merge& m = model.merges()[static_cast<std::size_t>(best)];
    std::vector<std::string> out;
    out.reserve(sym.size());
    for (std::size_t i = 0; i < sym.size();) {
      if (i + 1 < sym.size() && sym[i] == m.left && sym[i + 1] == m.right) {
        out.push_back(m.left + m.right);
        i += 2;
      } else {
        out.push_back(std::move(sym[i++]));
      }
    }
    sym = std::move(out);
    last = best;
  }
  return sym;
}

TokenStats token_stats(const std::vector<std::string>& words, const BpeModel& model) {
  TokenStats st;
  std::size_t total = 0;
  for (const auto& w : words) {
    if (w.empty()) continue;
    const std::size_t n = bpe_encode(w, model).size();
    ++st.histogram[n];
    total += n;
    ++st.words;
  }
  st.mean_tokens = st.words ? static_cast<double>(total) / static_cast<double>(st.words) : 0.0;
  return st;
}

std::vector<WordCount> count_words(std::istream& in) {
  std::map<std::string, std::uint64_t> counts;
  for (std::string line; std::getline(in, line);) {
    for (auto& w : split_whitespace(line)) ++counts[w];
  }
  std::vector<WordCount> out;
  for (auto& [w, c] : counts) out.push_back({w, c});
  return out;
}

std::string serialize_model(const BpeModel& model) {
  std::string out = "MTBPE v1 vocab_size=" + std::to_string(model.config().vocab_size) +
                    " min_freq=" + std::to_string(model.config().min_frequency) + "\n";
  for (const auto& m : model.merges()) out += m.left + " " + m.right + "\n";
  out += "#ALPHABET\n";
  for (const auto& a : model.alphabet()) out += a + "\n";
  return out;
}

BpeModel deserialize_model(std::string_view text) {
  auto lines = split_on(text, '\n');
  if (lines.empty()) throw std::runtime_error("empty BPE model");
  const auto header = split_whitespace(lines[0]);
  if (header.size() != 4 || header[0] != "MTBPE" || header[1] != "v1" ||
      header[2].rfind("vocab_size=", 0) != 0 || header[3].rfind("min_freq=", 0) != 0) {
    throw std::runtime_error("bad MTBPE header: '" + lines[0] + "'");
  }
  BpeConfig cfg;
  cfg.vocab_size = std::stoul(header[2].substr(11));
  cfg.min_frequency = std::stoull(header[3].substr(9));
  std::vector<Merge> merges;
  std::vector<std::string> alphabet;
  bool in_alphabet = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!in_alphabet && line == "#ALPHABET") {
      in_alphabet = true;
      continue;
    }
    if (in_alphabet) {
      alphabet.push_back(line);
      continue;
    }
    const auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 == line.size()) {
      throw std::runtime_error("bad merge on line " + std::to_string(i + 1));
    }
    merges.push_back({line.substr(0, sp), line.substr(sp + 1)});
  }
  if (!in_alphabet) throw std::runtime_error("MTBPE model missing #ALPHABET section");
  return BpeModel(std::move(merges), std::move(alphabet), cfg);
}

void save_model(const std::filesystem::path& path, const BpeModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_model(model);
}

BpeModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open BPE model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace morphtok::bpe
