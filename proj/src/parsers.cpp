#include "annotis/parsers.hpp"

#include <regex>

#include "annotis/text.hpp"

namespace annotis {

const char* to_string(ParseFailureReason reason) {
  switch (reason) {
    case ParseFailureReason::Empty: return "empty";
    case ParseFailureReason::NoMatch: return "no_match";
    case ParseFailureReason::MissingHead: return "missing_head";
    case ParseFailureReason::MissingTail: return "missing_tail";
    case ParseFailureReason::LengthMismatch: return "length_mismatch";
    case ParseFailureReason::BadSentiment: return "bad_sentiment";
    case ParseFailureReason::Grammar: return "grammar";
  }
  return "grammar";
}

std::optional<ParseFailureReason> parse_failure_reason_from_string(const std::string& name) {
  std::string n = fold_case(trim(name));
  if (n == "empty") return ParseFailureReason::Empty;
  if (n == "no_match") return ParseFailureReason::NoMatch;
  if (n == "missing_head") return ParseFailureReason::MissingHead;
  if (n == "missing_tail") return ParseFailureReason::MissingTail;
  if (n == "length_mismatch") return ParseFailureReason::LengthMismatch;
  if (n == "bad_sentiment") return ParseFailureReason::BadSentiment;
  if (n == "grammar") return ParseFailureReason::Grammar;
  return std::nullopt;
}

namespace {

const char* kEchoPrefixes[] = {"sentiment:", "relation:", "entity type:"};

// "None"-style negatives; the type pass legitimately finds nothing in most
// sentences.
bool is_none_marker(const std::string& piece) {
  std::string folded = fold_case(strip_surrounding_punct(piece));
  return folded.empty() || folded == "none" || folded == "n/a";
}

std::string first_nonempty_line(const std::string& text) {
  for (const auto& line : split_lines(text)) {
    if (!trim(line).empty()) return line;
  }
  return "";
}

// "3. rest" / "3) rest" -> "rest"; other lines unchanged.
std::string strip_index_prefix(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && is_space_byte(line[i])) ++i;
  std::size_t digits_start = i;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  if (i == digits_start || i >= line.size()) return line;
  if (line[i] != '.' && line[i] != ')') return line;
  return line.substr(i + 1);
}

bool line_has_index_prefix(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && is_space_byte(line[i])) ++i;
  std::size_t digits_start = i;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  return i > digits_start && i < line.size() && (line[i] == '.' || line[i] == ')');
}

}  // namespace

ParseOutcome<std::string> parse_label(const std::string& completion, const LabelSpace& space) {
  using Outcome = ParseOutcome<std::string>;
  std::string line = first_nonempty_line(completion);
  std::string candidate = trim(line);
  if (candidate.empty()) return Outcome::failure(ParseFailureReason::Empty, completion);
  for (const char* prefix : kEchoPrefixes) {
    if (istarts_with(candidate, prefix)) {
      candidate = trim(candidate.substr(std::string(prefix).size()));
      break;
    }
  }
  candidate = strip_surrounding_punct(candidate);
  if (candidate.empty()) return Outcome::failure(ParseFailureReason::Empty, completion);
  if (auto canonical = space.canonical(candidate)) return Outcome::success(*canonical);
  return Outcome::failure(ParseFailureReason::NoMatch, completion);
}

std::vector<std::string> parse_entity_list(const std::string& completion) {
  std::vector<std::string> out;
  for (const auto& piece : split(completion, ';')) {
    std::string entity = trim(piece);
    if (entity.empty() || is_none_marker(entity)) continue;
    if (std::find(out.begin(), out.end(), entity) == out.end()) out.push_back(entity);
  }
  return out;
}

std::vector<std::string> parse_numbered_list(const std::string& completion) {
  std::vector<std::string> out;
  for (const auto& line : split_lines(completion)) {
    if (!line_has_index_prefix(line)) continue;
    std::string rest = trim(strip_index_prefix(line));
    if (!rest.empty()) out.push_back(rest);
  }
  return out;
}

namespace {

ParseOutcome<std::pair<std::string, std::string>> parse_pair_inner(const std::string& text) {
  using Outcome = ParseOutcome<std::pair<std::string, std::string>>;
  const std::string head_marker = "head entity:";
  const std::string tail_marker = "tail entity:";

  std::size_t head_pos = ifind(text, head_marker);
  if (head_pos == std::string::npos) {
    return Outcome::failure(ParseFailureReason::MissingHead, text);
  }
  std::size_t head_start = head_pos + head_marker.size();
  std::size_t line_end = text.find('\n', head_start);
  if (line_end == std::string::npos) line_end = text.size();
  std::size_t semi = text.find(';', head_start);
  std::size_t head_end = (semi != std::string::npos && semi < line_end) ? semi : line_end;
  std::string head = trim(text.substr(head_start, head_end - head_start));
  if (head.empty()) return Outcome::failure(ParseFailureReason::MissingHead, text);

  std::size_t tail_pos = ifind(text, tail_marker, head_end);
  if (tail_pos == std::string::npos) {
    return Outcome::failure(ParseFailureReason::MissingTail, text);
  }
  std::size_t tail_start = tail_pos + tail_marker.size();
  std::size_t tail_line_end = text.find('\n', tail_start);
  if (tail_line_end == std::string::npos) tail_line_end = text.size();
  std::string tail = trim(text.substr(tail_start, tail_line_end - tail_start));
  if (!tail.empty() && tail.back() == ';') tail = trim(tail.substr(0, tail.size() - 1));
  if (tail.empty()) return Outcome::failure(ParseFailureReason::MissingTail, text);

  return Outcome::success({head, tail});
}

}  // namespace

ParseOutcome<std::pair<std::string, std::string>> parse_entity_pair(const std::string& completion) {
  return parse_pair_inner(completion);
}

std::vector<std::pair<std::string, std::string>> parse_entity_pairs(const std::string& completion) {
  std::vector<std::pair<std::string, std::string>> out;
  auto lines = split_lines(completion);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = strip_index_prefix(lines[i]);
    if (trim(line).empty()) continue;
    if (i == 0 && ifind(line, "head entity:") == std::string::npos &&
        ifind(line, "tail entity:") != std::string::npos) {
      // Echo continuation: the prompt ended with "Head Entity:".
      line = "Head Entity: " + line;
    }
    auto parsed = parse_pair_inner(line);
    if (parsed.ok()) out.push_back(parsed.value());
  }
  return out;
}

// ---------------------------------------------------------------------------
// ASTE grammars

namespace {

using TripletsOutcome = ParseOutcome<std::vector<SurfaceTriplet>>;

std::optional<Sentiment> clean_sentiment(const std::string& raw) {
  return sentiment_from_string(strip_surrounding_punct(raw));
}

TripletsOutcome parse_aste_v1(const std::string& completion) {
  static const std::regex clause(
      R"(Target\s*(\d+)\s*:\s*([^;\n]*);\s*Opinion\s*\1\s*:\s*([^;\n]*);\s*Sentiment\s*\1\s*:\s*([^;\n]*))",
      std::regex::icase);
  static const std::regex target_marker(R"(Target\s*\d+\s*:)", std::regex::icase);
  static const std::regex opinion_marker(R"(Opinion\s*\d+\s*:)", std::regex::icase);

  std::string text = completion;
  std::smatch target_m, opinion_m;
  bool has_target = std::regex_search(text, target_m, target_marker);
  bool has_opinion = std::regex_search(text, opinion_m, opinion_marker);
  if (has_opinion && (!has_target || opinion_m.position(0) < target_m.position(0))) {
    text = "Target0:" + text;  // echo continuation after the "Target0:" primer
  }

  std::vector<SurfaceTriplet> triplets;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), clause);
       it != std::sregex_iterator(); ++it) {
    std::string target = trim((*it)[2].str());
    std::string opinion = trim((*it)[3].str());
    std::string senti = trim((*it)[4].str());
    if (target.empty() || opinion.empty()) {
      return TripletsOutcome::failure(ParseFailureReason::Grammar, completion);
    }
    auto s = clean_sentiment(senti);
    if (!s) return TripletsOutcome::failure(ParseFailureReason::BadSentiment, completion);
    triplets.push_back({target, opinion, *s});
  }
  if (triplets.empty()) {
    return TripletsOutcome::failure(ParseFailureReason::Grammar, completion);
  }
  return TripletsOutcome::success(std::move(triplets));
}

std::vector<std::string> split_list_items(const std::string& segment) {
  std::vector<std::string> items;
  for (const auto& piece : split(segment, ';')) {
    std::string item = trim(piece);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

TripletsOutcome parse_aste_v2(const std::string& completion) {
  const std::string target_marker = "target:";
  const std::string opinion_marker = "opinion:";
  const std::string sentiment_marker = "sentiment:";

  std::string text = completion;
  std::size_t o_probe = ifind(text, opinion_marker);
  std::size_t t_probe = ifind(text, target_marker);
  if (o_probe != std::string::npos &&
      (t_probe == std::string::npos || o_probe < t_probe)) {
    text = "Target:" + text;
  }

  std::size_t t_pos = ifind(text, target_marker);
  if (t_pos == std::string::npos) {
    return TripletsOutcome::failure(ParseFailureReason::Grammar, completion);
  }
  std::size_t o_pos = ifind(text, opinion_marker, t_pos + target_marker.size());
  if (o_pos == std::string::npos) {
    return TripletsOutcome::failure(ParseFailureReason::Grammar, completion);
  }
  std::size_t s_pos = ifind(text, sentiment_marker, o_pos + opinion_marker.size());
  if (s_pos == std::string::npos) {
    return TripletsOutcome::failure(ParseFailureReason::Grammar, completion);
  }
  std::size_t s_end = text.find('\n', s_pos);
  if (s_end == std::string::npos) s_end = text.size();

  auto targets = split_list_items(text.substr(t_pos + target_marker.size(),
                                              o_pos - t_pos - target_marker.size()));
  auto opinions = split_list_items(text.substr(o_pos + opinion_marker.size(),
                                               s_pos - o_pos - opinion_marker.size()));
  auto sentiments = split_list_items(text.substr(s_pos + sentiment_marker.size(),
                                                 s_end - s_pos - sentiment_marker.size()));

  if (targets.size() != opinions.size() || targets.size() != sentiments.size()) {
    return TripletsOutcome::failure(ParseFailureReason::LengthMismatch, completion);
  }
  std::vector<SurfaceTriplet> triplets;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    auto s = clean_sentiment(sentiments[i]);
    if (!s) return TripletsOutcome::failure(ParseFailureReason::BadSentiment, completion);
    triplets.push_back({targets[i], opinions[i], *s});
  }
  if (triplets.empty()) {
    return TripletsOutcome::failure(ParseFailureReason::Grammar, completion);
  }
  return TripletsOutcome::success(std::move(triplets));
}

TripletsOutcome parse_aste_v3(const std::string& completion) {
  static const std::regex clause(
      R"(Target\s*(\d+)\s*:\s*is\s+([^.\n]*)\.\s*Its\s+opinion\s+span\s+is\s+([^.\n]*)\.\s*Its\s+sentiment\s+is\s+([A-Za-z]+))",
      std::regex::icase);
  static const std::regex target_marker(R"(Target\s*\d+\s*:)", std::regex::icase);

  std::string text = completion;
  if (ifind(text, "its opinion span is") != std::string::npos) {
    std::smatch m;
    bool has_target = std::regex_search(text, m, target_marker);
    std::size_t opinion_pos = ifind(text, "its opinion span is");
    if (!has_target || static_cast<std::size_t>(m.position(0)) > opinion_pos) {
      std::string glue = (!text.empty() && is_space_byte(text.front())) ? "" : " ";
      text = "Target0: is" + glue + text;
    }
  }

  std::vector<SurfaceTriplet> triplets;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), clause);
       it != std::sregex_iterator(); ++it) {
    std::string target = trim((*it)[2].str());
    std::string opinion = trim((*it)[3].str());
    std::string senti = trim((*it)[4].str());
    if (target.empty() || opinion.empty()) {
      return TripletsOutcome::failure(ParseFailureReason::Grammar, completion);
    }
    auto s = clean_sentiment(senti);
    if (!s) return TripletsOutcome::failure(ParseFailureReason::BadSentiment, completion);
    triplets.push_back({target, opinion, *s});
  }
  if (triplets.empty()) {
    return TripletsOutcome::failure(ParseFailureReason::Grammar, completion);
  }
  return TripletsOutcome::success(std::move(triplets));
}

}  // namespace

ParseOutcome<std::vector<SurfaceTriplet>> parse_aste(const std::string& completion, int variant) {
  if (is_none_marker(completion)) {
    return ParseOutcome<std::vector<SurfaceTriplet>>::success({});
  }
  switch (variant) {
    case 1: return parse_aste_v1(completion);
    case 2: return parse_aste_v2(completion);
    case 3: return parse_aste_v3(completion);
    default:
      return ParseOutcome<std::vector<SurfaceTriplet>>::failure(ParseFailureReason::Grammar,
                                                                completion);
  }
}

std::vector<std::string> parse_generated_texts(const std::string& completion) {
  std::vector<std::string> out;
  for (const auto& raw_line : split_lines(completion)) {
    std::string line = trim(strip_index_prefix(raw_line));
    if (line.empty()) continue;
    if (istarts_with(line, "sentiment:")) continue;  // block marker line
    if (istarts_with(line, "text:")) line = trim(line.substr(5));
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<SurfaceTriplet> parse_generated_triplets(const std::string& completion, int variant) {
  std::vector<SurfaceTriplet> out;
  for (const auto& raw_line : split_lines(completion)) {
    std::string line = strip_index_prefix(raw_line);
    if (trim(line).empty()) continue;
    if (variant == 3) {
      auto parsed = parse_sentiment_triplet_line(line);
      if (parsed.ok()) out.push_back(parsed.value());
    } else {
      auto parsed = parse_aste(line, variant);
      if (parsed.ok()) {
        for (auto& t : parsed.value()) out.push_back(std::move(t));
      }
    }
  }
  return out;
}

ParseOutcome<SurfaceTriplet> parse_sentiment_triplet_line(const std::string& line) {
  using Outcome = ParseOutcome<SurfaceTriplet>;
  const std::string s_marker = "sentiment:";
  const std::string t_marker = "target:";
  const std::string o_marker = "opinion:";

  auto segment_after = [&](const std::string& marker, std::size_t from,
                           std::size_t* end_out) -> std::optional<std::string> {
    std::size_t pos = ifind(line, marker, from);
    if (pos == std::string::npos) return std::nullopt;
    std::size_t start = pos + marker.size();
    std::size_t semi = line.find(';', start);
    std::size_t end = semi == std::string::npos ? line.size() : semi;
    if (end_out) *end_out = end;
    return trim(line.substr(start, end - start));
  };

  std::size_t cursor = 0;
  auto sentiment_text = segment_after(s_marker, 0, &cursor);
  if (!sentiment_text || sentiment_text->empty()) {
    return Outcome::failure(ParseFailureReason::Grammar, line);
  }
  auto target = segment_after(t_marker, cursor, &cursor);
  if (!target || target->empty()) return Outcome::failure(ParseFailureReason::Grammar, line);
  auto opinion = segment_after(o_marker, cursor, &cursor);
  if (!opinion || opinion->empty()) return Outcome::failure(ParseFailureReason::Grammar, line);
  auto s = clean_sentiment(*sentiment_text);
  if (!s) return Outcome::failure(ParseFailureReason::BadSentiment, line);
  return Outcome::success({*target, *opinion, *s});
}

}  // namespace annotis
