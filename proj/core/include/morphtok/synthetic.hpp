#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "morphtok/evalsuite.hpp"
#include "morphtok/labels.hpp"

namespace morphtok::synth {

struct Affix {
  std::string form;
  std::string feature;  // tag appended to the word's feature bundle
};

/// One optional affix position. At most one affix of the slot attaches.
struct Slot {
  std::string name;
  double probability = 0.5;
  std::vector<Affix> affixes;
};

struct Stem {
  std::string form;
  PosTag pos = PosTag::kNoun;
};

struct RandomStems {
  std::size_t count = 0;
  std::size_t min_length = 3;
  std::size_t max_length = 6;
  std::vector<PosTag> pos{PosTag::kNoun};
};

struct SentenceShape {
  std::size_t min_words = 4;
  std::size_t max_words = 12;
  double zipf_exponent = 1.0;
  /// Per-word probability of an orthographic variant that normalization undoes.
  double noise = 0.0;
};

struct SyntheticGrammar {
  std::string alphabet;  // letters for random stems
  std::vector<Stem> stems;
  RandomStems random_stems;
  std::vector<Slot> prefixes;  // applied outermost first
  std::vector<Slot> suffixes;  // applied innermost first
  SentenceShape sentences;

  void validate() const;
};

SyntheticGrammar grammar_from_json_text(std::string_view text);
SyntheticGrammar load_grammar(const std::filesystem::path& path);
std::string grammar_to_json_text(const SyntheticGrammar& g);

struct GeneratedWord {
  AnnotatedWord word;
  std::string lemma;
  std::vector<std::string> features;  // POS first
};

struct SyntheticData {
  std::vector<Stem> stems;  // explicit plus generated
  std::vector<GeneratedWord> words;  // i.i.d. draws, duplicates possible
  std::vector<GeneratedWord> gold;   // separate draws for held-out scoring
  std::vector<std::string> sentences;
  std::vector<eval::UniMorphEntry> unimorph;  // distinct (lemma, wordform), wordform != lemma
};

SyntheticData gen_synthetic(const SyntheticGrammar& grammar, std::size_t n_words,
                            std::size_t n_sentences, std::uint64_t seed, std::size_t n_gold = 0);

/// Writes annotations.tsv, gold.tsv, corpus.txt and unimorph.tsv; returns the paths.
std::vector<std::filesystem::path> write_synthetic(const SyntheticData& data,
                                                   const std::filesystem::path& dir);

}  // namespace morphtok::synth
