#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "annotis/task.hpp"

namespace annotis {

// Locates an annotated surface inside its sentence at exact byte offsets.
// Search order: case-sensitive, then case-insensitive, then both again with
// surrounding punctuation stripped from the surface. The first (leftmost)
// occurrence that starts and ends on token boundaries wins. Absence is not
// an error; it simply means no alignment.
std::optional<std::pair<std::size_t, std::size_t>> align_span(const std::string& sentence,
                                                              const std::string& surface);

// First contiguous run of token indices whose texts match the tokenized
// surface, exact first and case-folded on miss.
std::optional<std::vector<std::size_t>> align_token_sequence(const std::vector<Token>& tokens,
                                                             const std::string& surface);

}  // namespace annotis
