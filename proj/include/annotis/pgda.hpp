#pragma once

#include <map>
#include <string>
#include <vector>

#include "annotis/backend.hpp"
#include "annotis/prompts.hpp"
#include "annotis/task.hpp"

namespace annotis {

// Prompt-guided annotation of existing unlabeled text, plus direct inference
// over test inputs (same machinery, provenance pgi).

struct UnlabeledItem {
  std::string text;
  std::string head;  // relation extraction only
  std::string tail;
};

struct DropRecord {
  std::string input_text;
  std::string reason;
};

struct RunStats {
  std::size_t completions_issued = 0;       // type passes + disambiguations for NER
  std::size_t definition_completions = 0;   // itemized separately
  std::size_t disambiguation_completions = 0;
};

struct AnnotationRun {
  std::string variant;
  std::vector<AnnotatedInstance> outputs;
  std::vector<DropRecord> dropped;
  std::vector<std::string> notes;
  RunStats stats;
};

struct PipelineOptions {
  int parallelism = 1;
  int max_tokens = 64;
  double temperature = 0.0;  // annotation modes are deterministic by default
  Provenance provenance = Provenance::Pgda;
};

// An entity surface proposed by one or more type passes for a sentence.
struct TypedCandidate {
  std::string surface;
  std::vector<std::string> proposed_types;  // label-space order
  std::size_t sentence_index = 0;
};

AnnotationRun annotate_classification(CompletionClient& client, const TemplateCatalog& catalog,
                                      const TaskSpec& spec, const std::string& variant,
                                      const std::vector<UnlabeledItem>& items,
                                      const PipelineOptions& opts);

AnnotationRun annotate_relation(CompletionClient& client, const TemplateCatalog& catalog,
                                const TaskSpec& spec, const std::string& variant,
                                const std::vector<UnlabeledItem>& items,
                                const PipelineOptions& opts);

AnnotationRun annotate_aste(CompletionClient& client, const TemplateCatalog& catalog,
                            const TaskSpec& spec, const std::string& variant,
                            const std::vector<UnlabeledItem>& items, const PipelineOptions& opts);

// Mutable store of per-type definitions: user-supplied entries win, missing
// ones are generated once via the definition prompt and kept here.
class DefinitionStore {
 public:
  DefinitionStore() = default;
  explicit DefinitionStore(std::map<std::string, std::string> initial)
      : definitions_(std::move(initial)) {}

  const std::string* find(const std::string& type) const;
  void put(const std::string& type, std::string definition);
  const std::map<std::string, std::string>& all() const { return definitions_; }

 private:
  std::map<std::string, std::string> definitions_;
};

// Two-pass scheme: one extraction prompt per (sentence, type), then a
// disambiguation prompt for every aligned candidate proposed under two or
// more types. Candidates that cannot be aligned to token-bounded offsets are
// discarded; overlaps are resolved longest-first. A sentence whose candidates
// all fail yields a zero-span instance, not a drop.
AnnotationRun annotate_ner(CompletionClient& client, const TemplateCatalog& catalog,
                           const TaskSpec& spec, const std::vector<UnlabeledItem>& items,
                           const PipelineOptions& opts, DefinitionStore& definitions);

// Fills missing definitions through the definition prompt; returns how many
// completions that took.
std::size_t ensure_type_definitions(CompletionClient& client, const TemplateCatalog& catalog,
                                    const TaskSpec& spec, const PipelineOptions& opts,
                                    DefinitionStore& definitions);

// Per-type shots for the extraction pass: shots that contain at least one
// entity of the type, with that type's surfaces listed.
std::vector<NerTypeShot> type_shots_for(const TaskSpec& spec, const std::string& entity_type);

}  // namespace annotis
