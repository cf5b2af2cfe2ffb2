#include "annotis/align.hpp"

#include <set>

#include "annotis/text.hpp"

namespace annotis {

namespace {

std::optional<std::pair<std::size_t, std::size_t>> find_token_bounded(
    const std::string& sentence, const std::string& needle, bool case_sensitive,
    const std::set<std::size_t>& starts, const std::set<std::size_t>& ends) {
  if (needle.empty()) return std::nullopt;
  std::size_t pos = 0;
  while (pos + needle.size() <= sentence.size()) {
    std::size_t hit = case_sensitive ? sentence.find(needle, pos) : ifind(sentence, needle, pos);
    if (hit == std::string::npos) return std::nullopt;
    std::size_t end = hit + needle.size();
    if (starts.count(hit) && ends.count(end)) return std::make_pair(hit, end);
    pos = hit + 1;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::pair<std::size_t, std::size_t>> align_span(const std::string& sentence,
                                                              const std::string& surface) {
  if (surface.empty()) return std::nullopt;
  std::set<std::size_t> starts, ends;
  for (const auto& tok : tokenize(sentence)) {
    starts.insert(tok.start);
    ends.insert(tok.end);
  }
  if (auto hit = find_token_bounded(sentence, surface, true, starts, ends)) return hit;
  if (auto hit = find_token_bounded(sentence, surface, false, starts, ends)) return hit;
  std::string stripped = strip_surrounding_punct(surface);
  if (!stripped.empty() && stripped != surface) {
    if (auto hit = find_token_bounded(sentence, stripped, true, starts, ends)) return hit;
    if (auto hit = find_token_bounded(sentence, stripped, false, starts, ends)) return hit;
  }
  return std::nullopt;
}

std::optional<std::vector<std::size_t>> align_token_sequence(const std::vector<Token>& tokens,
                                                             const std::string& surface) {
  auto needle = token_texts(surface);
  if (needle.empty()) return std::nullopt;
  for (int folded = 0; folded < 2; ++folded) {
    for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
      bool match = true;
      for (std::size_t k = 0; k < needle.size(); ++k) {
        const std::string& have = tokens[i + k].text;
        const std::string& want = needle[k];
        if (folded ? fold_case(have) != fold_case(want) : have != want) {
          match = false;
          break;
        }
      }
      if (match) {
        std::vector<std::size_t> idx(needle.size());
        for (std::size_t k = 0; k < needle.size(); ++k) idx[k] = i + k;
        return idx;
      }
    }
  }
  return std::nullopt;
}

}  // namespace annotis
