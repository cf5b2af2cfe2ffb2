#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "annotis/task.hpp"

namespace annotis {

// Free-text completions become structured annotations here. Parsers never
// throw on arbitrary input: every call yields a value or a typed failure
// carrying the raw text for audit.

enum class ParseFailureReason {
  Empty,
  NoMatch,
  MissingHead,
  MissingTail,
  LengthMismatch,
  BadSentiment,
  Grammar,
};

const char* to_string(ParseFailureReason reason);
std::optional<ParseFailureReason> parse_failure_reason_from_string(const std::string& name);

struct ParseFailure {
  ParseFailureReason reason = ParseFailureReason::Grammar;
  std::string raw;  // the completion, verbatim
};

template <class T>
class ParseOutcome {
 public:
  static ParseOutcome success(T value) {
    ParseOutcome o;
    o.value_ = std::move(value);
    return o;
  }
  static ParseOutcome failure(ParseFailureReason reason, std::string raw) {
    ParseOutcome o;
    o.failure_ = ParseFailure{reason, std::move(raw)};
    return o;
  }

  bool ok() const { return value_.has_value(); }
  const T& value() const { return *value_; }
  T& value() { return *value_; }
  const ParseFailure& failure_info() const { return *failure_; }

 private:
  std::optional<T> value_;
  std::optional<ParseFailure> failure_;
};

// Label answers ("Positive", "head of government", "researcher"). Trims,
// strips surrounding punctuation and a leading "Sentiment:" / "Relation:" /
// "Entity Type:" echo, matches case-insensitively, returns canonical casing.
// Only the first non-empty line is considered.
ParseOutcome<std::string> parse_label(const std::string& completion, const LabelSpace& space);

// Semicolon-separated entity surfaces. Empty pieces and literal "None" /
// "N/A" answers are dropped; exact duplicates removed keeping the first.
// An empty result is valid: no entities of the type.
std::vector<std::string> parse_entity_list(const std::string& completion);

// Lines with an "N." or "N)" index prefix yield their remainder; everything
// else is ignored.
std::vector<std::string> parse_numbered_list(const std::string& completion);

// One "Head Entity: X; Tail Entity: Y" answer.
ParseOutcome<std::pair<std::string, std::string>> parse_entity_pair(const std::string& completion);

// Batch form: one pair per line, skipping lines that do not parse. The first
// line may be an echo continuation (the prompt ended with "Head Entity:").
std::vector<std::pair<std::string, std::string>> parse_entity_pairs(const std::string& completion);

// The three tagging answer grammars:
//   1: "Target0: t; Opinion0: o; Sentiment0: s" clauses
//   2: parallel "Target: a; b;" / "Opinion: ..." / "Sentiment: ..." lists
//   3: "Target0: is t. Its opinion span is o. Its sentiment is s."
// Echo continuations (completions that start after the primer) are handled.
// Blank or "None" completions parse to an empty triplet list.
ParseOutcome<std::vector<SurfaceTriplet>> parse_aste(const std::string& completion, int variant);

// Generation-output helpers (forgiving line-oriented parsers; noisy lines
// are skipped rather than failing the batch).

// Free-form generated texts: strips index prefixes and "Text:" echoes,
// ignores bare "Sentiment:" marker lines.
std::vector<std::string> parse_generated_texts(const std::string& completion);

// Triplet lines produced by the span-generation prompts; variant selects the
// same grammar family as parse_aste, with 3 meaning the
// "Sentiment: s; Target: t; Opinion: o;" line format.
std::vector<SurfaceTriplet> parse_generated_triplets(const std::string& completion, int variant);

// A single "Sentiment: s; Target: t; Opinion: o;" line.
ParseOutcome<SurfaceTriplet> parse_sentiment_triplet_line(const std::string& line);

}  // namespace annotis
