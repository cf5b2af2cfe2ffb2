#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace annotis {

// Byte-level text helpers. Everything here is ASCII-aware only: bytes >= 0x80
// pass through untouched, which keeps the pipelines byte-transparent to
// non-English text.

bool is_space_byte(char c);
bool is_punct_byte(char c);

std::string fold_case(std::string_view s);

std::string trim(std::string_view s);

// Removes leading and trailing punctuation bytes (after trimming whitespace).
std::string strip_surrounding_punct(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// Case-insensitive (ASCII) prefix test.
bool istarts_with(std::string_view s, std::string_view prefix);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replaces every occurrence of `from` (non-empty) with `to`.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

// Position of the first case-insensitive occurrence, or npos.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);

// FNV-1a 64-bit, used for stable fixture/cache file keys.
std::string fnv1a_hex(std::string_view s);

}  // namespace annotis
