#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "morphtok/segmenter.hpp"

namespace morphtok::seg {

inline constexpr std::string_view kModelMagic = "MTSEG";
inline constexpr int kModelVersion = 1;

/// Model container: two text header lines (magic/version, then key=value
/// shape fields), row-major little-endian float64 tensors in `tensors()`
/// order, then `#VOCAB n` and the decimal codepoint list.
std::string serialize_model(const SegmenterModel& model);
SegmenterModel deserialize_model(std::string_view bytes);

void save_model(const std::filesystem::path& path, const SegmenterModel& model);
SegmenterModel load_model(const std::filesystem::path& path);

/// Review file: `word TAB m1-m2-... TAB viterbi_score` per candidate.
std::string export_review(const SegmenterModel& model, const std::vector<std::string>& words);

/// Reads an (optionally hand-edited) review file back into annotations. An
/// optional fourth column carries a POS tag. Throws with the line number when
/// a segmentation does not concatenate to its word.
std::vector<AnnotatedWord> import_review(std::string_view text);

/// Appends words from `extra` whose surface is not already present.
std::vector<AnnotatedWord> merge_annotations(std::vector<AnnotatedWord> base,
                                             const std::vector<AnnotatedWord>& extra);

}  // namespace morphtok::seg
