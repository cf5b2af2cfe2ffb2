#include "reference_parsers.hpp"

namespace refparse {

namespace {

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool is_ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  if (u >= 0x80) return false;
  return (u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) || (u >= 0x5b && u <= 0x60) ||
         (u >= 0x7b && u <= 0x7e);
}

std::string trim_ws(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ws(s[b])) ++b;
  while (e > b && is_ws(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string lower_all(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(lower(c));
  return out;
}

std::string strip_punct_around(const std::string& s) {
  std::string t = trim_ws(s);
  std::size_t b = 0, e = t.size();
  while (b < e && is_ascii_punct(t[b])) ++b;
  while (e > b && is_ascii_punct(t[e - 1])) --e;
  return trim_ws(t.substr(b, e - b));
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : s) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!(current.empty() && !s.empty() && s.back() == '\n')) lines.push_back(current);
  if (s.empty()) lines = {""};
  return lines;
}

bool ci_match_at(const std::string& text, std::size_t pos, const std::string& needle) {
  if (pos + needle.size() > text.size()) return false;
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (lower(text[pos + i]) != lower(needle[i])) return false;
  }
  return true;
}

std::size_t ci_find(const std::string& text, const std::string& needle, std::size_t from = 0) {
  if (needle.empty()) return from <= text.size() ? from : std::string::npos;
  for (std::size_t i = from; i + needle.size() <= text.size(); ++i) {
    if (ci_match_at(text, i, needle)) return i;
  }
  return std::string::npos;
}

bool is_none_text(const std::string& s) {
  std::string t = lower_all(strip_punct_around(s));
  return t.empty() || t == "none" || t == "n/a";
}

std::string normalize_sentiment(const std::string& raw) {
  std::string t = lower_all(strip_punct_around(raw));
  if (t == "positive" || t == "negative" || t == "neutral") return t;
  return "";
}

// Position of the first "Target<digits>:" style marker (whitespace allowed
// around the digits), or npos.
std::size_t find_indexed_marker(const std::string& text, const std::string& word) {
  for (std::size_t i = 0; i + word.size() < text.size(); ++i) {
    if (!ci_match_at(text, i, word)) continue;
    std::size_t p = i + word.size();
    while (p < text.size() && is_ws(text[p])) ++p;
    std::size_t digits = p;
    while (p < text.size() && is_digit(text[p])) ++p;
    if (p == digits) continue;
    while (p < text.size() && is_ws(text[p])) ++p;
    if (p < text.size() && text[p] == ':') return i;
  }
  return std::string::npos;
}

}  // namespace

RefLabelResult ref_parse_label(const std::string& completion,
                               const std::vector<std::string>& labels) {
  RefLabelResult result;
  std::string line;
  for (const auto& candidate : lines_of(completion)) {
    if (!trim_ws(candidate).empty()) {
      line = candidate;
      break;
    }
  }
  std::string value = trim_ws(line);
  if (value.empty()) {
    result.reason = "empty";
    return result;
  }
  const char* prefixes[] = {"sentiment:", "relation:", "entity type:"};
  for (const char* prefix : prefixes) {
    std::string p(prefix);
    if (value.size() >= p.size() && ci_match_at(value, 0, p)) {
      value = trim_ws(value.substr(p.size()));
      break;
    }
  }
  value = strip_punct_around(value);
  if (value.empty()) {
    result.reason = "empty";
    return result;
  }
  std::string folded = lower_all(value);
  for (const auto& label : labels) {
    if (lower_all(trim_ws(label)) == folded) {
      result.ok = true;
      result.value = label;
      return result;
    }
  }
  result.reason = "no_match";
  return result;
}

std::vector<std::string> ref_parse_entity_list(const std::string& completion) {
  std::vector<std::string> out;
  std::string piece;
  auto flush = [&] {
    std::string entity = trim_ws(piece);
    piece.clear();
    if (entity.empty() || is_none_text(entity)) return;
    for (const auto& existing : out) {
      if (existing == entity) return;
    }
    out.push_back(entity);
  };
  for (char c : completion) {
    if (c == ';') {
      flush();
    } else {
      piece.push_back(c);
    }
  }
  flush();
  return out;
}

std::vector<std::string> ref_parse_numbered_list(const std::string& completion) {
  std::vector<std::string> out;
  for (const auto& line : lines_of(completion)) {
    std::size_t i = 0;
    while (i < line.size() && is_ws(line[i])) ++i;
    std::size_t digits = i;
    while (i < line.size() && is_digit(line[i])) ++i;
    if (i == digits || i >= line.size()) continue;
    if (line[i] != '.' && line[i] != ')') continue;
    std::string rest = trim_ws(line.substr(i + 1));
    if (!rest.empty()) out.push_back(rest);
  }
  return out;
}

RefPairResult ref_parse_entity_pair(const std::string& completion) {
  RefPairResult result;
  const std::string head_marker = "head entity:";
  const std::string tail_marker = "tail entity:";

  std::size_t head_pos = ci_find(completion, head_marker);
  if (head_pos == std::string::npos) {
    result.reason = "missing_head";
    return result;
  }
  std::size_t head_start = head_pos + head_marker.size();
  std::size_t line_end = completion.size();
  for (std::size_t i = head_start; i < completion.size(); ++i) {
    if (completion[i] == '\n') {
      line_end = i;
      break;
    }
  }
  std::size_t head_end = line_end;
  for (std::size_t i = head_start; i < line_end; ++i) {
    if (completion[i] == ';') {
      head_end = i;
      break;
    }
  }
  std::string head = trim_ws(completion.substr(head_start, head_end - head_start));
  if (head.empty()) {
    result.reason = "missing_head";
    return result;
  }

  std::size_t tail_pos = ci_find(completion, tail_marker, head_end);
  if (tail_pos == std::string::npos) {
    result.reason = "missing_tail";
    return result;
  }
  std::size_t tail_start = tail_pos + tail_marker.size();
  std::size_t tail_line_end = completion.size();
  for (std::size_t i = tail_start; i < completion.size(); ++i) {
    if (completion[i] == '\n') {
      tail_line_end = i;
      break;
    }
  }
  std::string tail = trim_ws(completion.substr(tail_start, tail_line_end - tail_start));
  if (!tail.empty() && tail.back() == ';') tail = trim_ws(tail.substr(0, tail.size() - 1));
  if (tail.empty()) {
    result.reason = "missing_tail";
    return result;
  }
  result.ok = true;
  result.head = head;
  result.tail = tail;
  return result;
}

std::vector<std::pair<std::string, std::string>> ref_parse_entity_pairs(
    const std::string& completion) {
  std::vector<std::pair<std::string, std::string>> out;
  auto lines = lines_of(completion);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    // strip an "N." / "N)" prefix
    {
      std::size_t p = 0;
      while (p < line.size() && is_ws(line[p])) ++p;
      std::size_t digits = p;
      while (p < line.size() && is_digit(line[p])) ++p;
      if (p > digits && p < line.size() && (line[p] == '.' || line[p] == ')')) {
        line = line.substr(p + 1);
      }
    }
    if (trim_ws(line).empty()) continue;
    if (i == 0 && ci_find(line, "head entity:") == std::string::npos &&
        ci_find(line, "tail entity:") != std::string::npos) {
      line = "Head Entity: " + line;
    }
    auto pair = ref_parse_entity_pair(line);
    if (pair.ok) out.emplace_back(pair.head, pair.tail);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ASTE

namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos;

  bool at_end() const { return pos >= text.size(); }
  void skip_ws() {
    while (pos < text.size() && is_ws(text[pos])) ++pos;
  }
  bool skip_ws_required() {
    std::size_t before = pos;
    skip_ws();
    return pos > before;
  }
  bool word_ci(const std::string& w) {
    if (!ci_match_at(text, pos, w)) return false;
    pos += w.size();
    return true;
  }
  bool digits(std::string* out) {
    std::size_t start = pos;
    while (pos < text.size() && is_digit(text[pos])) ++pos;
    if (pos == start) return false;
    *out = text.substr(start, pos - start);
    return true;
  }
  bool ch(char c) {
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  // Capture characters until one of the stops (or end); the capture itself
  // may be empty.
  std::string capture_until(const std::string& stops) {
    std::size_t start = pos;
    while (pos < text.size() && stops.find(text[pos]) == std::string::npos) ++pos;
    return text.substr(start, pos - start);
  }
};

struct ClauseV1 {
  std::string target, opinion, sentiment;
  std::size_t end = 0;
};

// "Target<d>: t; Opinion<d>: o; Sentiment<d>: s"
bool clause_v1_at(const std::string& text, std::size_t start, ClauseV1* out) {
  Cursor c{text, start};
  if (!c.word_ci("target")) return false;
  c.skip_ws();
  std::string index;
  if (!c.digits(&index)) return false;
  c.skip_ws();
  if (!c.ch(':')) return false;
  c.skip_ws();
  std::string target = c.capture_until(";\n");
  if (!c.ch(';')) return false;
  c.skip_ws();
  if (!c.word_ci("opinion")) return false;
  c.skip_ws();
  std::string index2;
  if (!c.digits(&index2) || index2 != index) return false;
  c.skip_ws();
  if (!c.ch(':')) return false;
  c.skip_ws();
  std::string opinion = c.capture_until(";\n");
  if (!c.ch(';')) return false;
  c.skip_ws();
  if (!c.word_ci("sentiment")) return false;
  c.skip_ws();
  std::string index3;
  if (!c.digits(&index3) || index3 != index) return false;
  c.skip_ws();
  if (!c.ch(':')) return false;
  c.skip_ws();
  std::string sentiment = c.capture_until(";\n");
  out->target = trim_ws(target);
  out->opinion = trim_ws(opinion);
  out->sentiment = trim_ws(sentiment);
  out->end = c.pos;
  return true;
}

// "Target<d>: is t. Its opinion span is o. Its sentiment is <word>"
bool clause_v3_at(const std::string& text, std::size_t start, ClauseV1* out) {
  Cursor c{text, start};
  if (!c.word_ci("target")) return false;
  c.skip_ws();
  std::string index;
  if (!c.digits(&index)) return false;
  c.skip_ws();
  if (!c.ch(':')) return false;
  c.skip_ws();
  if (!c.word_ci("is")) return false;
  if (!c.skip_ws_required()) return false;
  std::string target = c.capture_until(".\n");
  if (!c.ch('.')) return false;
  c.skip_ws();
  if (!c.word_ci("its")) return false;
  if (!c.skip_ws_required()) return false;
  if (!c.word_ci("opinion")) return false;
  if (!c.skip_ws_required()) return false;
  if (!c.word_ci("span")) return false;
  if (!c.skip_ws_required()) return false;
  if (!c.word_ci("is")) return false;
  if (!c.skip_ws_required()) return false;
  std::string opinion = c.capture_until(".\n");
  if (!c.ch('.')) return false;
  c.skip_ws();
  if (!c.word_ci("its")) return false;
  if (!c.skip_ws_required()) return false;
  if (!c.word_ci("sentiment")) return false;
  if (!c.skip_ws_required()) return false;
  if (!c.word_ci("is")) return false;
  if (!c.skip_ws_required()) return false;
  std::size_t word_start = c.pos;
  while (c.pos < text.size() &&
         ((text[c.pos] >= 'a' && text[c.pos] <= 'z') || (text[c.pos] >= 'A' && text[c.pos] <= 'Z')))
    ++c.pos;
  if (c.pos == word_start) return false;
  out->target = trim_ws(target);
  out->opinion = trim_ws(opinion);
  out->sentiment = text.substr(word_start, c.pos - word_start);
  out->end = c.pos;
  return true;
}

RefTripletsResult scan_clauses(const std::string& text, const std::string& original, int variant) {
  RefTripletsResult result;
  std::vector<ClauseV1> clauses;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ClauseV1 clause;
    bool matched = variant == 1 ? clause_v1_at(text, pos, &clause)
                                : clause_v3_at(text, pos, &clause);
    if (matched) {
      clauses.push_back(clause);
      pos = clause.end;
    } else {
      ++pos;
    }
  }
  if (clauses.empty()) {
    result.reason = "grammar";
    return result;
  }
  for (const auto& clause : clauses) {
    if (clause.target.empty() || clause.opinion.empty()) {
      result.reason = "grammar";
      return result;
    }
    std::string sentiment = normalize_sentiment(clause.sentiment);
    if (sentiment.empty()) {
      result.reason = "bad_sentiment";
      return result;
    }
    result.triplets.push_back({clause.target, clause.opinion, sentiment});
  }
  (void)original;
  result.ok = true;
  return result;
}

std::vector<std::string> split_items(const std::string& segment) {
  std::vector<std::string> items;
  std::string piece;
  auto flush = [&] {
    std::string item = trim_ws(piece);
    piece.clear();
    if (!item.empty()) items.push_back(item);
  };
  for (char c : segment) {
    if (c == ';') {
      flush();
    } else {
      piece.push_back(c);
    }
  }
  flush();
  return items;
}

RefTripletsResult ref_parse_aste_v2(const std::string& completion) {
  RefTripletsResult result;
  std::string text = completion;
  std::size_t o_probe = ci_find(text, "opinion:");
  std::size_t t_probe = ci_find(text, "target:");
  if (o_probe != std::string::npos && (t_probe == std::string::npos || o_probe < t_probe)) {
    text = "Target:" + text;
  }
  std::size_t t_pos = ci_find(text, "target:");
  if (t_pos == std::string::npos) {
    result.reason = "grammar";
    return result;
  }
  std::size_t o_pos = ci_find(text, "opinion:", t_pos + 7);
  if (o_pos == std::string::npos) {
    result.reason = "grammar";
    return result;
  }
  std::size_t s_pos = ci_find(text, "sentiment:", o_pos + 8);
  if (s_pos == std::string::npos) {
    result.reason = "grammar";
    return result;
  }
  std::size_t s_end = text.size();
  for (std::size_t i = s_pos; i < text.size(); ++i) {
    if (text[i] == '\n') {
      s_end = i;
      break;
    }
  }
  auto targets = split_items(text.substr(t_pos + 7, o_pos - t_pos - 7));
  auto opinions = split_items(text.substr(o_pos + 8, s_pos - o_pos - 8));
  auto sentiments = split_items(text.substr(s_pos + 10, s_end - s_pos - 10));
  if (targets.size() != opinions.size() || targets.size() != sentiments.size()) {
    result.reason = "length_mismatch";
    return result;
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::string sentiment = normalize_sentiment(sentiments[i]);
    if (sentiment.empty()) {
      result.reason = "bad_sentiment";
      return result;
    }
    result.triplets.push_back({targets[i], opinions[i], sentiment});
  }
  if (result.triplets.empty()) {
    result.reason = "grammar";
    return result;
  }
  result.ok = true;
  return result;
}

}  // namespace

RefTripletsResult ref_parse_aste(const std::string& completion, int variant) {
  RefTripletsResult result;
  if (is_none_text(completion)) {
    result.ok = true;
    return result;
  }
  if (variant == 2) return ref_parse_aste_v2(completion);
  if (variant != 1 && variant != 3) {
    result.reason = "grammar";
    return result;
  }

  std::string text = completion;
  if (variant == 1) {
    std::size_t target_pos = find_indexed_marker(text, "target");
    std::size_t opinion_pos = find_indexed_marker(text, "opinion");
    if (opinion_pos != std::string::npos &&
        (target_pos == std::string::npos || opinion_pos < target_pos)) {
      text = "Target0:" + text;
    }
  } else {
    std::size_t phrase = ci_find(text, "its opinion span is");
    if (phrase != std::string::npos) {
      std::size_t target_pos = find_indexed_marker(text, "target");
      if (target_pos == std::string::npos || target_pos > phrase) {
        std::string glue = (!text.empty() && is_ws(text[0])) ? "" : " ";
        text = "Target0: is" + glue + text;
      }
    }
  }
  return scan_clauses(text, completion, variant);
}

}  // namespace refparse
