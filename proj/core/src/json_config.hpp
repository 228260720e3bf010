#pragma once

// Internal JSON bindings shared by the config loaders and the pipeline.

#include <filesystem>

#include "json.hpp"
#include "morphtok/textnorm.hpp"

namespace morphtok::detail {

using json = nlohmann::ordered_json;

std::string format_codepoints(std::u32string_view cps);
std::u32string parse_codepoints(std::string_view text);

json textnorm_to_json(const textnorm::NormalizationConfig& cfg);
textnorm::NormalizationConfig textnorm_from_json(const json& j,
                                                 const std::filesystem::path& base_dir);

}  // namespace morphtok::detail
