#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "annotis/task.hpp"

namespace annotis {

// ---------------------------------------------------------------------------
// Seed payloads: the structured spans a sentence is generated around. Defined
// here because prompt rendering consumes them; the generation pipelines wrap
// them with bookkeeping.

struct ReSeed {
  std::string head;
  std::string tail;
  std::string relation;
  bool operator==(const ReSeed&) const = default;
};

struct NerSeed {
  std::vector<std::pair<std::string, std::string>> entities;  // (type, surface)
  bool operator==(const NerSeed&) const = default;
};

struct AsteSeed {
  std::vector<SurfaceTriplet> triplets;
  bool operator==(const AsteSeed&) const = default;
};

struct ClsSeed {
  std::string label;
  std::string entity;  // dictionary entity for DADG classification; empty otherwise
  bool operator==(const ClsSeed&) const = default;
};

using SeedPayload = std::variant<ClsSeed, ReSeed, NerSeed, AsteSeed>;

struct SentenceGenShot {
  SeedPayload seed;
  std::string sentence;
};

struct NerTypeShot {
  std::string sentence;
  std::vector<std::string> entities;
};

struct DisambiguationShot {
  std::string sentence;
  std::string entity;
  std::vector<std::string> candidates;
  std::string answer;
};

// ---------------------------------------------------------------------------
// Templates

// How a template's formats are assembled into a prompt. Each family fixes the
// block structure; the catalog entry supplies the wording.
enum class PromptFamily {
  PgdaClassification,
  PgdaRelation,
  PgdaRelationWithDefs,   // per-relation definition block instead of the name list
  PgdaAsteIndexed,        // TargetN:/OpinionN:/SentimentN: clauses
  PgdaAsteParallel,       // parallel Target:/Opinion:/Sentiment: lists
  PgdgClassification,
  DadgClassification,
  PgdgRelationPairs,
  PgdgNerEntities,
  PgdgAsteIndexed,
  PgdgAsteParallel,
  PgdgAsteSentimentConditioned,
  SentenceGenRelation,
  SentenceGenNer,
  SentenceGenAste,
  NerTypePass,
  NerDisambiguation,
  NerTypeDefinition,
};

const char* to_string(PromptFamily family);
std::optional<PromptFamily> prompt_family_from_string(const std::string& name);

struct PromptTemplate {
  std::string template_id;
  PromptFamily family = PromptFamily::PgdaClassification;
  std::string instruction;
  std::string example_block_format;  // named {placeholders}; per-clause for ASTE families
  std::string query_block_format;
  std::string join_separator = "\n";
  bool mark_entities_in_text = false;  // inline [X HEAD ENTITY] markers (relation variant 3)
};

struct RenderedPrompt {
  std::string text;
  std::string template_id;
  int shot_count = 0;
  std::vector<std::string> stop_sequences;  // suggested stops for this family
  // The final primer line of the query block ("Sentiment:", "Target0:", ...).
  // Completions continue from here; parsers use it for echo handling.
  std::string answer_prefix;
};

enum class PromptErrorKind {
  UnknownVariant,
  MissingField,
  UnknownLabel,
  EmptySpans,
  TooFewCandidates,
  BadTemplate,
  EntityNotInSentence,
};

class PromptError : public std::runtime_error {
 public:
  PromptError(PromptErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  PromptErrorKind kind() const { return kind_; }

 private:
  PromptErrorKind kind_;
};

// Substitutes {name} placeholders from the value map. Unknown names are a
// MissingField error; text without braces passes through untouched.
std::string render_format(const std::string& format,
                          const std::map<std::string, std::string>& values);

// Placeholder names a template may use.
const std::vector<std::string>& allowed_placeholders();

class TemplateCatalog {
 public:
  // Every built-in prompt family, ids pgda-sst2, pgda-fewrel-1..5,
  // pgda-aste-1..3, pgdg-*, dadg-sst2, gen-sentence-*, ner-*.
  static TemplateCatalog builtin();

  // Loads every *.json template file in the directory, overriding or adding
  // to the current entries. Users extend the catalog without rebuilding.
  void load_directory(const std::string& dir);
  void register_template(PromptTemplate t);

  const PromptTemplate& require(const std::string& id) const;
  const PromptTemplate* find(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

// ---------------------------------------------------------------------------
// Rendering operations

struct PgdaQuery {
  std::string text;
  std::string head;  // relation extraction only
  std::string tail;
};

// One shot rendered as an example block, plus the answer portion alone (the
// text a completion must contain to reproduce the shot). The block always
// starts with the corresponding query text.
struct ExampleBlock {
  std::string block;
  std::string answer;
};

ExampleBlock format_example(const TemplateCatalog& catalog, const TaskSpec& spec,
                            const std::string& variant, const FewShotExample& shot);

RenderedPrompt render_pgda(const TemplateCatalog& catalog, const TaskSpec& spec,
                           const std::string& variant, const PgdaQuery& query);

// Span/label generation prompts (the first PGDG step). For ASTE, variant
// selects pgdg-aste-1..3; for variant 3 `label` names the sentiment the
// prompt is conditioned on.
RenderedPrompt render_pgdg_span(const TemplateCatalog& catalog, const TaskSpec& spec,
                                const std::string& label, int count,
                                const std::string& variant = "");

// Sentence generation around one seed (the second PGDG/DADG step).
RenderedPrompt render_sentence_gen(const TemplateCatalog& catalog, const TaskSpec& spec,
                                   const SeedPayload& seed,
                                   const std::vector<SentenceGenShot>& shots,
                                   const std::string& variant = "");

RenderedPrompt render_ner_type_pass(const TemplateCatalog& catalog, const TaskSpec& spec,
                                    const std::string& entity_type, const std::string& definition,
                                    const std::vector<NerTypeShot>& shots,
                                    const std::string& sentence);

RenderedPrompt render_disambiguation(const TemplateCatalog& catalog, const std::string& sentence,
                                     const std::string& entity,
                                     const std::vector<std::string>& candidates,
                                     const std::vector<DisambiguationShot>& shots = {});

// Prompt that asks the model to write an entity-type definition (cached by
// the NER pipeline, one completion per type).
RenderedPrompt render_type_definition(const TemplateCatalog& catalog, const TaskSpec& spec,
                                      const std::string& entity_type);

// Opinion/sentiment generation for a fixed aspect (ASTE DADG): the chosen
// PGDG prompt with the dictionary aspect already filled into the primer.
RenderedPrompt render_aste_opinion_gen(const TemplateCatalog& catalog, const TaskSpec& spec,
                                       const std::string& aspect, const std::string& variant,
                                       int count,
                                       Sentiment sentiment_for_v3 = Sentiment::Positive);

// Helpers shared with pipelines/tests.
std::string capitalize_first(const std::string& s);
std::string pluralize(const std::string& s);

}  // namespace annotis
