#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace annotis {

enum class TaskKind { Classification, RelationExtraction, Ner, Aste };

const char* to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(const std::string& name);

// Where an annotation came from.
enum class Provenance { Pgda, Pgdg, Dadg, Pgi, Gold, Mock };

const char* to_string(Provenance p);
std::optional<Provenance> provenance_from_string(const std::string& name);

// Closed label set for a task. Labels keep their declared casing; matching is
// case-insensitive after trimming.
struct LabelSpace {
  std::vector<std::string> labels;
  std::map<std::string, std::string> definitions;  // keyed by canonical label

  // Case-insensitive lookup; returns the canonical (declared) casing.
  std::optional<std::string> canonical(const std::string& candidate) const;
  bool contains(const std::string& candidate) const { return canonical(candidate).has_value(); }
  const std::string* definition_of(const std::string& label) const;
  // Position of the label in declaration order, or npos. Case-insensitive.
  std::size_t index_of(const std::string& label) const;

  // Empty when valid; otherwise the broken invariants.
  std::vector<std::string> validate() const;
};

struct Token {
  std::string text;
  std::size_t start = 0;  // byte offset, inclusive
  std::size_t end = 0;    // byte offset, exclusive

  bool operator==(const Token&) const = default;
};

// Whitespace split with leading/trailing punctuation bytes detached into
// their own single-character tokens. Interior punctuation (hyphens, periods
// in abbreviations) stays attached. Deterministic, byte-transparent to
// multi-byte UTF-8 sequences.
std::vector<Token> tokenize(const std::string& sentence);

std::vector<std::string> token_texts(const std::string& sentence);

struct EntitySpan {
  std::string surface;
  std::size_t start = 0;  // byte offset into the sentence, inclusive
  std::size_t end = 0;    // exclusive
  std::string entity_type;

  bool operator==(const EntitySpan&) const = default;
};

// An entity mention by surface string, with offsets when known.
struct Mention {
  std::string surface;
  std::optional<std::size_t> start;
  std::optional<std::size_t> end;

  bool operator==(const Mention&) const = default;
};

struct ClassificationInstance {
  std::string text;
  std::string label;

  bool operator==(const ClassificationInstance&) const = default;
};

struct RelationInstance {
  std::string sentence;
  Mention head;
  Mention tail;
  std::string relation;

  bool operator==(const RelationInstance&) const = default;
};

enum class Sentiment { Positive, Negative, Neutral };

const char* to_string(Sentiment s);                                   // "positive" etc.
std::optional<Sentiment> sentiment_from_string(const std::string&);   // case-insensitive
const char* sentiment_code(Sentiment s);                              // POS / NEG / NEU
std::optional<Sentiment> sentiment_from_code(const std::string&);

struct AsteTriplet {
  std::vector<std::size_t> target;   // contiguous token indices
  std::vector<std::size_t> opinion;  // contiguous token indices
  Sentiment sentiment = Sentiment::Neutral;
  std::string target_surface;   // tokens at target indices joined with one space
  std::string opinion_surface;  // same for opinion

  bool operator==(const AsteTriplet&) const = default;
};

// A triplet before token alignment: bare surfaces plus polarity, as parsed
// from completions or drawn for generation.
struct SurfaceTriplet {
  std::string target;
  std::string opinion;
  Sentiment sentiment = Sentiment::Neutral;

  bool operator==(const SurfaceTriplet&) const = default;
};

struct NerInstance {
  std::string sentence;
  std::vector<EntitySpan> spans;

  bool operator==(const NerInstance&) const = default;
};

struct AsteInstance {
  std::string sentence;
  std::vector<AsteTriplet> triplets;

  bool operator==(const AsteInstance&) const = default;
};

struct AnnotatedInstance {
  std::variant<ClassificationInstance, RelationInstance, NerInstance, AsteInstance> payload;
  Provenance provenance = Provenance::Mock;

  TaskKind kind() const;
  // The raw text of the instance (text or sentence, depending on kind).
  const std::string& text() const;

  bool operator==(const AnnotatedInstance&) const = default;
};

struct FewShotExample {
  std::string input_text;
  AnnotatedInstance annotation;
};

struct TaskSpec {
  TaskKind kind = TaskKind::Classification;
  LabelSpace label_space;
  std::vector<FewShotExample> shots;
  std::string domain_hint;  // e.g. "AI", "laptop"; empty when none
};

// Empty result means the instance satisfies every invariant for the spec;
// otherwise each entry names one violated invariant. Violations are data,
// not faults.
std::vector<std::string> validate_instance(const AnnotatedInstance& inst, const TaskSpec& spec);

}  // namespace annotis
