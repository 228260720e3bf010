#include <sstream>

#include "doctest.h"
#include "morphtok/rng.hpp"
#include "morphtok/textnorm.hpp"

using namespace morphtok;
using namespace morphtok::textnorm;

namespace {

std::vector<std::string> texts(const std::vector<CleanSentence>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.text);
  return out;
}

std::vector<CleanSentence> sentences(const std::vector<std::string>& v) {
  std::vector<CleanSentence> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(make_sentence(v[i], i));
  return out;
}

std::string random_text(Rng& rng, std::size_t len) {
  static const std::u32string pool =
      U"ئابپتجچحخدرڕزژسشعغفڤقکگلڵمنهوۆیێە"
      U"\u0643\u064A\u0649\u0629\u06C0\u06BE\u0640\u200C\u200D\u0623\u0625\u0622"
      U"xyzABC019\u0663.\u061F!  \t\u064E\u0301\u00A0";
  std::u32string s;
  for (std::size_t i = 0; i < len; ++i) {
    const Codepoint c = pool[rng.below(pool.size())];
    const std::size_t reps = rng.bernoulli(0.2) ? 1 + rng.below(6) : 1;
    s.append(reps, c);
  }
  return encode_utf8(s);
}

}  // namespace

TEST_CASE("long repetition runs collapse to three") {
  const auto cfg = default_config();
  CHECK(normalize_line("سڵاووووو", cfg) == "سڵاووو");
  CHECK(normalize_line("ببب", cfg) == "ببب");
}

TEST_CASE("clean text passes through unchanged") {
  const auto cfg = default_config();
  const std::string clean = "من کتێبەکانم خوێندەوە";
  CHECK(normalize_line(clean, cfg) == clean);
}

TEST_CASE("zwnj between stem and suffix is removed") {
  const auto cfg = default_config();
  const std::string in = "کتێب\u200Cەکان";
  const auto out = decode_utf8(normalize_line(in, cfg));
  const std::u32string expected{0x06A9, 0x062A, 0x06CE, 0x0628, 0x06D5, 0x06A9, 0x0627, 0x0646};
  CHECK(out == expected);
}

TEST_CASE("arabic letter variants map to sorani forms") {
  const auto cfg = default_config();
  CHECK(decode_utf8(normalize_line("كتيب", cfg)) == std::u32string{0x06A9, 0x062A, 0x06CC, 0x0628});
  CHECK(decode_utf8(normalize_line("به\u200C", cfg)) == std::u32string{0x0628, 0x06D5});
  CHECK(normalize_line("دەــــرس", cfg) == "دەرس");
}

TEST_CASE("bundled char map file matches the built-in default") {
  const auto from_file = load_char_map(std::string(MORPHTOK_DATA_DIR) + "/charmap.tsv");
  CHECK(from_file == default_char_map());
}

TEST_CASE("cyclic char map is rejected") {
  auto cfg = default_config();
  cfg.char_map = {{U"a", U"bb"}, {U"b", U"a"}};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = default_config();
  cfg.max_repeat = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("disallowed characters are dropped and counted") {
  const auto cfg = default_config();
  std::size_t dropped = 0;
  CHECK(normalize_line("سڵاو abc", cfg, &dropped) == "سڵاو");
  CHECK(dropped == 3);
}

TEST_CASE("filter reasons in order") {
  const auto cfg = default_config();
  auto d = filter_sentence("سڵا", cfg);
  CHECK_FALSE(d.keep);
  CHECK(d.reason == FilterReason::kTooShort);

  d = filter_sentence("abcdefghij klmnopqrs", cfg);
  CHECK(d.reason == FilterReason::kNoScriptLetters);

  // nine native letters plus one loan letter: 1/10 > 0.05
  d = filter_sentence("کتێبەکانمص", cfg);
  CHECK(d.reason == FilterReason::kDialect);
  CHECK(d.foreign_ratio == doctest::Approx(0.1));

  d = filter_sentence("کتێبەکانم", cfg);
  CHECK(d.keep);
  CHECK(d.reason == FilterReason::kKept);
  CHECK(d.foreign_ratio == 0.0);
}

TEST_CASE("min_tokens rule") {
  auto cfg = default_config();
  cfg.min_tokens = 3;
  CHECK(filter_sentence("کتێبەکانم خوێند", cfg).reason == FilterReason::kTooFewTokens);
  CHECK(filter_sentence("کتێبەکانم خوێند ئەمڕۆ", cfg).keep);
}

TEST_CASE("exact and fuzzy dedup") {
  const auto cfg = default_config();
  auto r = dedup_corpus(sentences({"a b c", "a b c"}), cfg);
  CHECK(texts(r.kept) == std::vector<std::string>{"a b c"});
  CHECK(r.exact_removed == 1);

  r = dedup_corpus(sentences({"a b c d e", "a b c d f"}), cfg);
  CHECK(r.kept.size() == 2);
  CHECK(token_jaccard({"a", "b", "c", "d", "e"}, {"a", "b", "c", "d", "f"}) == doctest::Approx(4.0 / 6.0));

  r = dedup_corpus(sentences({"a b c d e", "a b c d"}), cfg);
  CHECK(texts(r.kept) == std::vector<std::string>{"a b c d e"});
  CHECK(r.fuzzy_removed == 1);
}

TEST_CASE("fuzzy dedup only looks back over the window") {
  auto cfg = default_config();
  cfg.dedup_window = 2;
  auto r = dedup_corpus(sentences({"a b c d e", "x1 x2 x3", "y1 y2 y3", "a b c d"}), cfg);
  CHECK(r.kept.size() == 4);
  cfg.dedup_window = 3;
  r = dedup_corpus(sentences({"a b c d e", "x1 x2 x3", "y1 y2 y3", "a b c d"}), cfg);
  CHECK(r.kept.size() == 3);
}

TEST_CASE("prefix-filtered fuzzy dedup agrees with brute force") {
  auto cfg = default_config();
  Rng rng(11);
  const double thresholds[] = {0.25, 0.4, 0.5, 0.6, 0.75, 0.8, 1.0};
  for (int trial = 0; trial < 21; ++trial) {
    cfg.fuzzy_dedup_threshold = thresholds[trial % 7];
    std::vector<std::string> raw;
    for (int i = 0; i < 60; ++i) {
      std::string s;
      const std::size_t n = 1 + rng.below(6);
      for (std::size_t k = 0; k < n; ++k) s += (k ? " t" : "t") + std::to_string(rng.below(9));
      raw.push_back(s);
    }
    const auto fast = dedup_corpus(sentences(raw), cfg);
    std::vector<std::string> kept;
    for (const auto& s : raw) {
      bool dup = false;
      for (const auto& k : kept) {
        if (k == s || token_jaccard(split_whitespace(k), split_whitespace(s)) >= cfg.fuzzy_dedup_threshold) {
          dup = true;
          break;
        }
      }
      if (!dup) kept.push_back(s);
    }
    CHECK(texts(fast.kept) == kept);
  }
}

TEST_CASE("sentence splitting") {
  const auto cfg = default_config();
  CHECK(texts(segment_sentences("A. B؟ C", cfg)) == std::vector<std::string>{"A", "B", "C"});
  CHECK(texts(segment_sentences("no delimiters here", cfg)) == std::vector<std::string>{"no delimiters here"});
  CHECK(texts(segment_sentences("A.. B", cfg)) == std::vector<std::string>{"A", "B"});
}

TEST_CASE("normalize_line is idempotent on random strings") {
  const auto cfg = default_config();
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_text(rng, rng.below(40));
    const auto once = normalize_line(s, cfg);
    CHECK(normalize_line(once, cfg) == once);
    for (Codepoint c : decode_utf8(once)) {
      CHECK((c == U' ' || cfg.allowed_chars.count(c) > 0));
    }
    const auto cps = decode_utf8(once);
    int run = 1;
    for (std::size_t k = 1; k < cps.size(); ++k) {
      run = cps[k] == cps[k - 1] ? run + 1 : 1;
      CHECK(run <= cfg.max_repeat);
    }
  }
}

TEST_CASE("corpus stats partition the input") {
  const auto cfg = default_config();
  std::string doc =
      "کتێبەکانم خوێندەوە. کتێبەکانم خوێندەوە. سڵا. ١٢٣٤٥٦٧. "
      "کتێبەکانم خوێندەوە ئەمڕۆ! ژمارەیەکی زۆر ثثثث ثثث صص؟ ئێمە دەڕۆین بۆ ماڵەوە.\n"
      "ئێمە دەڕۆین بۆ ماڵەوە\n";
  std::istringstream in(doc);
  const auto res = normalize_corpus(in, cfg, InputMode::kDocument);
  const auto& s = res.stats;
  CHECK(s.input_lines == 2);
  CHECK(s.kept_sentences == res.sentences.size());
  CHECK(s.kept_sentences + s.removed() == s.input_sentences);
  CHECK(s.exact_dups_removed >= 2);
  CHECK(s.dialect_filtered == 1);
  CHECK(s.quality_filtered == 2);
  std::size_t tokens = 0;
  for (const auto& c : res.sentences) tokens += c.token_count;
  CHECK(s.token_total == tokens);
}

TEST_CASE("clean corpus is a fixed point and threads do not change output") {
  const auto cfg = default_config();
  std::string doc;
  Rng rng(5);
  for (int i = 0; i < 300; ++i) doc += random_text(rng, 30) + " " + std::to_string(i) + "\n";
  std::istringstream in1(doc), in3(doc);
  const auto one = normalize_corpus(in1, cfg, InputMode::kLine, 1);
  const auto three = normalize_corpus(in3, cfg, InputMode::kLine, 3);
  CHECK(one.sentences == three.sentences);

  std::string clean;
  for (const auto& s : one.sentences) clean += s.text + "\n";
  std::istringstream again(clean);
  const auto second = normalize_corpus(again, cfg, InputMode::kLine);
  CHECK(texts(second.sentences) == texts(one.sentences));
}

TEST_CASE("config json round trip") {
  auto cfg = default_config();
  cfg.max_repeat = 2;
  cfg.min_tokens = 2;
  const auto text = config_to_json_text(cfg);
  const auto back = config_from_json_text(text);
  CHECK(config_to_json_text(back) == text);
  CHECK(back.max_repeat == 2);
  CHECK(back.char_map == cfg.char_map);
}
