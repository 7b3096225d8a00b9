#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace forge::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

/// Collapses every run of ASCII whitespace into one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

std::vector<std::string> split(std::string_view s, char sep);

/// Lowercased alphanumeric word tokens. Bytes >= 0x80 are kept inside tokens
/// so non-ASCII words survive as opaque tokens.
std::vector<std::string> word_tokens(std::string_view s);

/// Decodes UTF-8 into Unicode scalar values. Invalid bytes decode as U+FFFD
/// and consume one byte, so the mapping is total.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Byte offset of every scalar boundary: result.size() == scalars + 1.
std::vector<std::size_t> scalar_boundaries(std::string_view s);

std::size_t scalar_length(std::string_view s);

/// Hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view bytes);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace forge::text
