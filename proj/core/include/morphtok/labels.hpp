#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace morphtok {

enum class LabelScheme {
  kEndOnly,   // 1 on the last character of each morpheme (0-0-1)
  kBothEnds,  // 1 on the first and last character of each morpheme (1-0-1)
};

std::string_view scheme_name(LabelScheme s);  // "end" / "both"
LabelScheme parse_scheme(std::string_view name);

enum class PosTag { kNoun, kAdjective, kVerb, kOther };

std::string_view pos_name(PosTag p);  // "N", "ADJ", "V", "OTHER"
/// Maps a tag such as "N", "ADJ", "V" (case-insensitive); anything else is OTHER.
PosTag parse_pos(std::string_view tag);

/// A word with its gold morpheme segmentation. Morphemes tile the surface.
struct AnnotatedWord {
  std::string surface;
  std::vector<std::string> morphemes;
  std::optional<PosTag> pos;

  /// Throws std::invalid_argument unless morphemes are non-empty and concatenate to surface.
  void validate() const;
  friend bool operator==(const AnnotatedWord&, const AnnotatedWord&) = default;
};

/// One 0/1 label per codepoint of the surface.
std::vector<int> boundary_labels(const AnnotatedWord& word, LabelScheme scheme);

/// Inverse of boundary_labels. Accepts any 0/1 sequence and always returns
/// morphemes that tile `chars`. Under end_only a trailing 0 is an implicit
/// boundary. Under both_ends, runs of adjacent 1s are read as two-character
/// morphemes where ambiguous, with a single trailing character if the run is odd.
std::vector<std::string> labels_to_morphemes(const std::vector<std::string>& chars,
                                             const std::vector<int>& labels, LabelScheme scheme);

/// Interior cut positions: k means a cut between codepoint k-1 and k (1 <= k < n).
std::set<int> interior_cuts(const std::vector<std::string>& morphemes);

std::vector<std::string> split_morphemes(std::string_view joined, char sep = '-');

/// Reads `surface TAB m1-m2-... [TAB pos]`; `#` lines and blank lines are skipped.
/// Errors carry the 1-based line number.
std::vector<AnnotatedWord> parse_annotations(std::string_view text);
std::vector<AnnotatedWord> load_annotations(const std::filesystem::path& path);
std::string format_annotation(const AnnotatedWord& w);
void save_annotations(const std::filesystem::path& path, const std::vector<AnnotatedWord>& words);

}  // namespace morphtok
