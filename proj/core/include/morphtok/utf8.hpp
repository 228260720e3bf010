#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace morphtok {

using Codepoint = char32_t;

/// Decodes UTF-8 into codepoints. Malformed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view text);

std::string encode_utf8(std::u32string_view cps);
void append_utf8(std::string& out, Codepoint cp);

/// Splits a UTF-8 string into one string per codepoint.
std::vector<std::string> split_chars(std::string_view text);

/// Number of codepoints (not bytes).
std::size_t codepoint_length(std::string_view text);

/// Splits on ASCII whitespace runs; no empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::vector<std::string> split_on(std::string_view text, char delim);

std::string_view trim(std::string_view text);

}  // namespace morphtok
