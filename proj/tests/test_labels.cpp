#include "doctest.h"
#include "morphtok/labels.hpp"
#include "morphtok/rng.hpp"
#include "morphtok/utf8.hpp"

using namespace morphtok;

namespace {

AnnotatedWord word(std::vector<std::string> morphemes) {
  AnnotatedWord w;
  w.surface = join(morphemes, "");
  w.morphemes = std::move(morphemes);
  return w;
}

std::vector<std::string> random_tiling(Rng& rng, std::size_t n, std::size_t min_len) {
  std::vector<std::string> out;
  std::size_t used = 0;
  while (used < n) {
    std::size_t len = min_len + rng.below(4);
    if (used + len > n || n - used - len < min_len) len = n - used;
    std::string m;
    for (std::size_t k = 0; k < len; ++k) m += static_cast<char>('a' + rng.below(5));
    out.push_back(m);
    used += len;
  }
  return out;
}

}  // namespace

TEST_CASE("end-only labels mark morpheme-final characters") {
  CHECK(boundary_labels(word({"kitêb", "ekan", "im"}), LabelScheme::kEndOnly) ==
        std::vector<int>{0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 1});
  CHECK(boundary_labels(word({"abc"}), LabelScheme::kEndOnly) == std::vector<int>{0, 0, 1});
}

TEST_CASE("both-ends labels mark first and last characters") {
  CHECK(boundary_labels(word({"abc", "de"}), LabelScheme::kBothEnds) == std::vector<int>{1, 0, 1, 1, 1});
  CHECK(boundary_labels(word({"a", "bcd"}), LabelScheme::kBothEnds) == std::vector<int>{1, 1, 0, 1});
}

TEST_CASE("labels decode back to the morphemes") {
  const auto w = word({"kitêb", "ekan", "im"});
  for (auto scheme : {LabelScheme::kEndOnly, LabelScheme::kBothEnds}) {
    CHECK(labels_to_morphemes(split_chars(w.surface), boundary_labels(w, scheme), scheme) == w.morphemes);
  }
}

TEST_CASE("end-only encoding is a bijection on segmentations") {
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const auto w = word(random_tiling(rng, 1 + rng.below(12), 1));
    const auto labels = boundary_labels(w, LabelScheme::kEndOnly);
    CHECK(labels_to_morphemes(split_chars(w.surface), labels, LabelScheme::kEndOnly) == w.morphemes);
  }
}

TEST_CASE("both-ends decoding is exact for morphemes of length two or more") {
  Rng rng(10);
  for (int i = 0; i < 2000; ++i) {
    const auto w = word(random_tiling(rng, 2 + rng.below(12), 2));
    const auto labels = boundary_labels(w, LabelScheme::kBothEnds);
    CHECK(labels_to_morphemes(split_chars(w.surface), labels, LabelScheme::kBothEnds) == w.morphemes);
  }
}

TEST_CASE("both-ends round trip is stable on the label side") {
  // a|bc and ab|c share the labels 1,1,1, so decoding picks one reading and
  // re-encoding must give the same labels back.
  CHECK(boundary_labels(word({"a", "bc"}), LabelScheme::kBothEnds) ==
        boundary_labels(word({"ab", "c"}), LabelScheme::kBothEnds));
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const auto w = word(random_tiling(rng, 1 + rng.below(12), 1));
    const auto labels = boundary_labels(w, LabelScheme::kBothEnds);
    const auto decoded = labels_to_morphemes(split_chars(w.surface), labels, LabelScheme::kBothEnds);
    CHECK(join(decoded, "") == w.surface);
    CHECK(boundary_labels(word(decoded), LabelScheme::kBothEnds) == labels);
  }
}

TEST_CASE("any label sequence decodes to a tiling") {
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<std::string> chars;
    std::vector<int> labels;
    for (std::size_t k = 0; k < n; ++k) {
      chars.push_back(std::string(1, static_cast<char>('a' + k)));
      labels.push_back(static_cast<int>(rng.below(2)));
    }
    for (auto scheme : {LabelScheme::kEndOnly, LabelScheme::kBothEnds}) {
      const auto m = labels_to_morphemes(chars, labels, scheme);
      CHECK(join(m, "") == join(chars, ""));
      for (const auto& x : m) CHECK_FALSE(x.empty());
    }
  }
  // trailing zero is an implicit boundary under end-only
  CHECK(labels_to_morphemes({"a", "b", "c"}, {0, 1, 0}, LabelScheme::kEndOnly) ==
        std::vector<std::string>{"ab", "c"});
}

TEST_CASE("invalid annotations are rejected") {
  AnnotatedWord w{"abc", {"ab", "d"}, std::nullopt};
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  CHECK_THROWS_AS(boundary_labels(w, LabelScheme::kEndOnly), std::invalid_argument);
  AnnotatedWord e{"ab", {"ab", ""}, std::nullopt};
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
}

TEST_CASE("annotation file parsing") {
  const auto words = parse_annotations("# comment\nkitêbekanim\tkitêb-ekan-im\tN\n\nabc\tabc\n");
  REQUIRE(words.size() == 2);
  CHECK(words[0].morphemes == std::vector<std::string>{"kitêb", "ekan", "im"});
  CHECK(words[0].pos == PosTag::kNoun);
  CHECK_FALSE(words[1].pos.has_value());
  CHECK(format_annotation(words[0]) == "kitêbekanim\tkitêb-ekan-im\tN");
  try {
    parse_annotations("ab\ta-b\nabc\tab-d\n");
    FAIL("expected a rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("interior cuts") {
  CHECK(interior_cuts({"kitêb", "ekan", "im"}) == std::set<int>{5, 9});
  CHECK(interior_cuts({"abc"}).empty());
  CHECK(parse_pos("adj") == PosTag::kAdjective);
  CHECK(parse_pos("X") == PosTag::kOther);
}
