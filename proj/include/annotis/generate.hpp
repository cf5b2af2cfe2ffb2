#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "annotis/backend.hpp"
#include "annotis/pgda.hpp"
#include "annotis/prompts.hpp"
#include "annotis/task.hpp"

namespace annotis {

enum class SeedSource { Generated, Dictionary };

struct SpanSeed {
  SeedPayload payload;
  SeedSource source = SeedSource::Generated;
};

struct GenerationBudget {
  int per_label_cap = 200;        // generated spans/entities per label
  int per_prompt_count = 20;      // the "generate N different ..." count
  int entities_per_sentence_min = 2;
  int entities_per_sentence_max = 4;
  int sentence_count = 0;         // NER/ASTE sentence stage size (0 = pool-derived)
};

struct GenOptions {
  int parallelism = 1;
  double temperature = 0.7;  // generation modes favour diversity
  int span_max_tokens = 512;
  int sentence_max_tokens = 128;
  Provenance provenance = Provenance::Pgdg;
  std::string span_variant;      // e.g. pgdg-aste-2; empty = kind default
  std::string sentence_variant;  // sentence-generation template override
  std::uint64_t rng_seed = 0;
};

struct PairPoolResult {
  std::vector<ReSeed> pairs;
  bool stalled = false;
  std::size_t completions = 0;
};

struct EntityPoolResult {
  std::vector<std::string> entities;
  bool stalled = false;
  std::size_t completions = 0;
};

struct TripletPoolResult {
  std::vector<SurfaceTriplet> triplets;
  bool stalled = false;
  std::size_t completions = 0;
};

struct TextPoolResult {
  std::vector<std::string> texts;
  bool stalled = false;
  std::size_t completions = 0;
};

// Span-generation stage: repeated prompts, case-folded dedup, stop at the
// per-label cap or after two consecutive calls add nothing new (a stall is
// reported with partial results, not an error).
PairPoolResult generate_pairs(CompletionClient& client, const TemplateCatalog& catalog,
                              const TaskSpec& spec, const std::string& relation,
                              const GenerationBudget& budget, const GenOptions& opts);

EntityPoolResult generate_entity_pool(CompletionClient& client, const TemplateCatalog& catalog,
                                      const TaskSpec& spec, const std::string& entity_type,
                                      const GenerationBudget& budget, const GenOptions& opts);

TripletPoolResult generate_triplet_pool(CompletionClient& client, const TemplateCatalog& catalog,
                                        const TaskSpec& spec, const std::string& label,
                                        const GenerationBudget& budget, const GenOptions& opts);

// Classification degenerates to direct text generation (no span step).
TextPoolResult generate_classification_texts(CompletionClient& client,
                                             const TemplateCatalog& catalog, const TaskSpec& spec,
                                             const std::string& label,
                                             const GenerationBudget& budget,
                                             const GenOptions& opts);

// NER seed assembly: every seed draws k in [min, max] entities uniformly
// without replacement from the union pool, type tags retained. Deterministic
// under the rng seed.
std::vector<SpanSeed> assemble_ner_seeds(
    const std::map<std::string, std::vector<std::string>>& pools, const GenerationBudget& budget,
    std::uint64_t rng_seed, std::size_t seed_count, SeedSource source = SeedSource::Generated);

// ASTE seed assembly: sequential groups of k in [min, max] triplets.
std::vector<SpanSeed> assemble_aste_seeds(const std::vector<SurfaceTriplet>& pool,
                                          const GenerationBudget& budget, std::uint64_t rng_seed,
                                          std::size_t seed_count,
                                          SeedSource source = SeedSource::Generated);

struct GenerationRun {
  std::vector<AnnotatedInstance> instances;
  std::vector<DropRecord> dropped;
  std::vector<std::string> notes;
  std::size_t span_completions = 0;
  std::size_t sentence_completions = 0;
};

// Sentence stage: one sentence per seed, every seeded surface verified
// present (exact aligned offsets for NER/ASTE, containment for relation
// heads/tails). A failing sentence gets one retry with fresh sampling, then
// the seed is dropped.
GenerationRun generate_sentences(CompletionClient& client, const TemplateCatalog& catalog,
                                 const TaskSpec& spec, const std::vector<SpanSeed>& seeds,
                                 const std::vector<SentenceGenShot>& shots,
                                 const GenOptions& opts);

// Derives sentence-generation shots from the task's few-shot examples.
std::vector<SentenceGenShot> sentence_shots_from(const TaskSpec& spec);

// Full two-step generation for the task (spans first, then sentences).
GenerationRun run_pgdg(CompletionClient& client, const TemplateCatalog& catalog,
                       const TaskSpec& spec, const GenerationBudget& budget,
                       const GenOptions& opts);

// Dictionary-assisted variant: seeds come from a knowledge source instead of
// the span prompts. Keys of `pairs`/`entities` are task labels.
struct DictSeeds {
  std::map<std::string, std::vector<ReSeed>> pairs;                // relation -> pairs
  std::map<std::string, std::vector<std::string>> entity_pools;    // type -> entities
  std::vector<std::string> aspects;                                // ASTE aspect pool
  std::vector<std::string> plain_entities;                         // classification pool
};

GenerationRun run_dadg(CompletionClient& client, const TemplateCatalog& catalog,
                       const TaskSpec& spec, const DictSeeds& dict, const GenerationBudget& budget,
                       const GenOptions& opts);

}  // namespace annotis
