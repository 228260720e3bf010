#include "morphtok/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json_config.hpp"
#include "morphtok/rng.hpp"
#include "morphtok/utf8.hpp"

namespace morphtok::synth {

using detail::json;

void SyntheticGrammar::validate() const {
  if (stems.empty() && random_stems.count == 0) throw std::invalid_argument("grammar: no stems");
  if (random_stems.count > 0) {
    if (decode_utf8(alphabet).empty()) throw std::invalid_argument("grammar: random stems need an alphabet");
    if (random_stems.min_length < 1 || random_stems.max_length < random_stems.min_length) {
      throw std::invalid_argument("grammar: bad random stem length range");
    }
    if (random_stems.pos.empty()) throw std::invalid_argument("grammar: random stems need a POS list");
  }
  for (const auto& s : stems) {
    if (s.form.empty()) throw std::invalid_argument("grammar: empty stem");
  }
  for (const auto* slots : {&prefixes, &suffixes}) {
    for (const auto& slot : *slots) {
      if (!(slot.probability >= 0.0 && slot.probability <= 1.0)) {
        throw std::invalid_argument("grammar: slot '" + slot.name + "' probability outside [0,1]");
      }
      if (slot.affixes.empty()) throw std::invalid_argument("grammar: slot '" + slot.name + "' is empty");
      for (const auto& a : slot.affixes) {
        if (a.form.empty()) throw std::invalid_argument("grammar: empty affix in slot '" + slot.name + "'");
      }
    }
  }
  if (sentences.min_words < 1 || sentences.max_words < sentences.min_words) {
    throw std::invalid_argument("grammar: bad sentence length range");
  }
  if (!(sentences.noise >= 0.0 && sentences.noise <= 1.0)) throw std::invalid_argument("grammar: noise outside [0,1]");
}

namespace {

std::vector<Slot> slots_from_json(const json& arr) {
  std::vector<Slot> out;
  for (const auto& s : arr) {
    Slot slot;
    slot.name = s.value("name", "");
    slot.probability = s.value("probability", 0.5);
    for (const auto& a : s.at("affixes")) {
      slot.affixes.push_back({a.at("form").get<std::string>(), a.value("feature", "")});
    }
    out.push_back(std::move(slot));
  }
  return out;
}

json slots_to_json(const std::vector<Slot>& slots) {
  json arr = json::array();
  for (const auto& s : slots) {
    json affixes = json::array();
    for (const auto& a : s.affixes) affixes.push_back(json{{"form", a.form}, {"feature", a.feature}});
    arr.push_back(json{{"name", s.name}, {"probability", s.probability}, {"affixes", affixes}});
  }
  return arr;
}

}  // namespace

SyntheticGrammar grammar_from_json_text(std::string_view text) {
  const json j = json::parse(text);
  SyntheticGrammar g;
  g.alphabet = j.value("alphabet", "");
  if (j.contains("stems")) {
    for (const auto& s : j["stems"]) g.stems.push_back({s.at("form").get<std::string>(), parse_pos(s.value("pos", "N"))});
  }
  if (j.contains("random_stems")) {
    const auto& r = j["random_stems"];
    g.random_stems.count = r.value("count", std::size_t{0});
    g.random_stems.min_length = r.value("min_length", std::size_t{3});
    g.random_stems.max_length = r.value("max_length", std::size_t{6});
    if (r.contains("pos")) {
      g.random_stems.pos.clear();
      for (const auto& p : r["pos"]) g.random_stems.pos.push_back(parse_pos(p.get<std::string>()));
    }
  }
  if (j.contains("prefixes")) g.prefixes = slots_from_json(j["prefixes"]);
  if (j.contains("suffixes")) g.suffixes = slots_from_json(j["suffixes"]);
  if (j.contains("sentences")) {
    const auto& s = j["sentences"];
    g.sentences.min_words = s.value("min_words", std::size_t{4});
    g.sentences.max_words = s.value("max_words", std::size_t{12});
    g.sentences.zipf_exponent = s.value("zipf_exponent", 1.0);
    g.sentences.noise = s.value("noise", 0.0);
  }
  g.validate();
  return g;
}

SyntheticGrammar load_grammar(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grammar " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return grammar_from_json_text(ss.str());
}

std::string grammar_to_json_text(const SyntheticGrammar& g) {
  json j;
  j["alphabet"] = g.alphabet;
  json stems = json::array();
  for (const auto& s : g.stems) stems.push_back(json{{"form", s.form}, {"pos", std::string(pos_name(s.pos))}});
  j["stems"] = stems;
  json pos = json::array();
  for (auto p : g.random_stems.pos) pos.push_back(std::string(pos_name(p)));
  j["random_stems"] = json{{"count", g.random_stems.count},
                           {"min_length", g.random_stems.min_length},
                           {"max_length", g.random_stems.max_length},
                           {"pos", pos}};
  j["prefixes"] = slots_to_json(g.prefixes);
  j["suffixes"] = slots_to_json(g.suffixes);
  j["sentences"] = json{{"min_words", g.sentences.min_words},
                        {"max_words", g.sentences.max_words},
                        {"zipf_exponent", g.sentences.zipf_exponent},
                        {"noise", g.sentences.noise}};
  return j.dump(2) + "\n";
}

namespace {

GeneratedWord draw_word(const std::vector<Stem>& stems, const SyntheticGrammar& g, Rng& rng) {
  const Stem& stem = stems[rng.below(stems.size())];
  std::vector<std::string> pre, post, pre_feats, post_feats;
  for (const auto& slot : g.prefixes) {
    if (rng.bernoulli(slot.probability)) {
      const auto& a = slot.affixes[rng.below(slot.affixes.size())];
      pre.push_back(a.form);
      if (!a.feature.empty()) pre_feats.push_back(a.feature);
    }
  }
  for (const auto& slot : g.suffixes) {
    if (rng.bernoulli(slot.probability)) {
      const auto& a = slot.affixes[rng.below(slot.affixes.size())];
      post.push_back(a.form);
      if (!a.feature.empty()) post_feats.push_back(a.feature);
    }
  }
  GeneratedWord w;
  w.lemma = stem.form;
  w.word.pos = stem.pos;
  w.word.morphemes = pre;
  w.word.morphemes.push_back(stem.form);
  w.word.morphemes.insert(w.word.morphemes.end(), post.begin(), post.end());
  w.word.surface = join(w.word.morphemes, "");
  w.features.emplace_back(pos_name(stem.pos));
  w.features.insert(w.features.end(), pre_feats.begin(), pre_feats.end());
  w.features.insert(w.features.end(), post_feats.begin(), post_feats.end());
  return w;
}

std::string add_noise(const std::string& word, Rng& rng) {
  std::u32string cps = decode_utf8(word);
  switch (rng.below(3)) {
    case 0:
      for (auto& c : cps) {
        if (c == U'\u06A9') c = U'\u0643';
      }
      break;
    case 1:
      for (auto& c : cps) {
        if (c == U'\u06CC') c = U'\u064A';
      }
      break;
    default:
      if (cps.size() > 1) cps.insert(cps.begin() + 1, U'\u0640');
      break;
  }
  return encode_utf8(cps);
}

}  // namespace

SyntheticData gen_synthetic(const SyntheticGrammar& grammar, std::size_t n_words,
                            std::size_t n_sentences, std::uint64_t seed, std::size_t n_gold) {
  grammar.validate();
  SyntheticData data;
  data.stems = grammar.stems;
  {
    Rng rng(derive_seed(seed, "synthetic.stems"));
    const std::u32string letters = decode_utf8(grammar.alphabet);
    std::set<std::string> seen;
    for (const auto& s : data.stems) seen.insert(s.form);
    std::size_t attempts = 0;
    std::size_t made = 0;
    while (made < grammar.random_stems.count) {
      if (++attempts > 1000 * (grammar.random_stems.count + 1)) {
        throw std::runtime_error("gen_synthetic: alphabet too small for the requested distinct stems");
      }
      const std::size_t span = grammar.random_stems.max_length - grammar.random_stems.min_length + 1;
      const std::size_t len = grammar.random_stems.min_length + rng.below(span);
      std::u32string cps;
      for (std::size_t i = 0; i < len; ++i) cps.push_back(letters[rng.below(letters.size())]);
      std::string form = encode_utf8(cps);
      if (!seen.insert(form).second) continue;
      const PosTag pos = grammar.random_stems.pos[rng.below(grammar.random_stems.pos.size())];
      data.stems.push_back({std::move(form), pos});
      ++made;
    }
  }

  Rng word_rng(derive_seed(seed, "synthetic.words"));
  for (std::size_t i = 0; i < n_words; ++i) data.words.push_back(draw_word(data.stems, grammar, word_rng));
  Rng gold_rng(derive_seed(seed, "synthetic.gold"));
  for (std::size_t i = 0; i < n_gold; ++i) data.gold.push_back(draw_word(data.stems, grammar, gold_rng));

  std::vector<const GeneratedWord*> lexicon;
  {
    std::unordered_set<std::string> seen;
    for (const auto& w : data.words) {
      if (seen.insert(w.word.surface).second) lexicon.push_back(&w);
    }
  }
  {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto* w : lexicon) {
      if (w->word.surface == w->lemma) continue;
      if (!seen.emplace(w->lemma, w->word.surface).second) continue;
      eval::UniMorphEntry e;
      e.lemma = w->lemma;
      e.wordform = w->word.surface;
      e.features = w->features;
      e.pos = eval::pos_from_features(e.features);
      data.unimorph.push_back(std::move(e));
    }
  }

  if (n_sentences > 0 && !lexicon.empty()) {
    std::vector<double> cumulative(lexicon.size());
    double run = 0.0;
    for (std::size_t r = 0; r < lexicon.size(); ++r) {
      run += 1.0 / std::pow(static_cast<double>(r + 1), grammar.sentences.zipf_exponent);
      cumulative[r] = run;
    }
    Rng rng(derive_seed(seed, "synthetic.sentences"));
    const auto& shape = grammar.sentences;
    for (std::size_t s = 0; s < n_sentences; ++s) {
      const std::size_t len = shape.min_words + rng.below(shape.max_words - shape.min_words + 1);
      std::vector<std::string> toks;
      for (std::size_t i = 0; i < len; ++i) {
        const double u = rng.uniform() * run;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t r = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), lexicon.size() - 1);
        std::string tok = lexicon[r]->word.surface;
        if (shape.noise > 0.0 && rng.bernoulli(shape.noise)) tok = add_noise(tok, rng);
        toks.push_back(std::move(tok));
      }
      data.sentences.push_back(join(toks, " "));
    }
  }
  return data;
}

std::vector<std::filesystem::path> write_synthetic(const SyntheticData& data,
                                                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  auto open = [&](const std::string& name) {
    out.push_back(dir / name);
    std::ofstream f(out.back(), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out.back().string());
    return f;
  };
  {
    auto f = open("annotations.tsv");
    for (const auto& w : data.words) f << format_annotation(w.word) << '\n';
  }
  {
    auto f = open("gold.tsv");
    for (const auto& w : data.gold) f << format_annotation(w.word) << '\n';
  }
  {
    auto f = open("corpus.txt");
    for (const auto& s : data.sentences) f << s << '\n';
  }
  {
    auto f = open("unimorph.tsv");
    for (const auto& e : data.unimorph) f << e.lemma << '\t' << e.wordform << '\t' << join(e.features, ";") << '\n';
  }
  return out;
}

}  // namespace morphtok::synth
