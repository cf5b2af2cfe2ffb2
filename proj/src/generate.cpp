#include "annotis/generate.hpp"

#include <algorithm>
#include <set>

#include "annotis/align.hpp"
#include "annotis/dataset_io.hpp"
#include "annotis/parsers.hpp"
#include "annotis/rng.hpp"
#include "annotis/text.hpp"

namespace annotis {

namespace {

CompletionRequest span_request(const RenderedPrompt& prompt, const GenOptions& opts) {
  CompletionRequest req;
  req.prompt = prompt.text;
  req.max_tokens = opts.span_max_tokens;
  req.temperature = opts.temperature;
  req.stop_sequences = prompt.stop_sequences;
  return req;
}

CompletionRequest sentence_request(const RenderedPrompt& prompt, const GenOptions& opts) {
  CompletionRequest req;
  req.prompt = prompt.text;
  req.max_tokens = opts.sentence_max_tokens;
  req.temperature = opts.temperature;
  req.stop_sequences = prompt.stop_sequences;
  return req;
}

// Shared accumulation loop: call `fetch` repeatedly, dedup by `key`, stop at
// the cap or after two consecutive calls with no new items.
template <class Item, class Fetch, class Key>
std::pair<std::vector<Item>, bool> accumulate_until(int cap, Fetch fetch, Key key,
                                                    std::size_t* completions) {
  std::vector<Item> out;
  std::set<std::string> seen;
  int barren_calls = 0;
  while (static_cast<int>(out.size()) < cap && barren_calls < 2) {
    std::vector<Item> batch = fetch();
    ++*completions;
    std::size_t before = out.size();
    for (auto& item : batch) {
      if (static_cast<int>(out.size()) >= cap) break;
      if (seen.insert(key(item)).second) out.push_back(std::move(item));
    }
    barren_calls = out.size() == before ? barren_calls + 1 : 0;
  }
  bool stalled = static_cast<int>(out.size()) < cap;
  return {std::move(out), stalled};
}

}  // namespace

PairPoolResult generate_pairs(CompletionClient& client, const TemplateCatalog& catalog,
                              const TaskSpec& spec, const std::string& relation,
                              const GenerationBudget& budget, const GenOptions& opts) {
  PairPoolResult result;
  auto fetch = [&]() -> std::vector<ReSeed> {
    auto prompt =
        render_pgdg_span(catalog, spec, relation, budget.per_prompt_count, opts.span_variant);
    auto outcome = client.complete(span_request(prompt, opts));
    if (!outcome.ok()) return {};
    std::vector<ReSeed> pairs;
    for (auto& [head, tail] : parse_entity_pairs(outcome.result->text)) {
      pairs.push_back({head, tail, relation});
    }
    return pairs;
  };
  auto key = [](const ReSeed& seed) { return fold_case(seed.head) + "\x1f" + fold_case(seed.tail); };
  auto [pairs, stalled] =
      accumulate_until<ReSeed>(budget.per_label_cap, fetch, key, &result.completions);
  result.pairs = std::move(pairs);
  result.stalled = stalled;
  return result;
}

EntityPoolResult generate_entity_pool(CompletionClient& client, const TemplateCatalog& catalog,
                                      const TaskSpec& spec, const std::string& entity_type,
                                      const GenerationBudget& budget, const GenOptions& opts) {
  EntityPoolResult result;
  std::string variant = opts.span_variant.empty() ? "pgdg-ner-entities" : opts.span_variant;
  auto fetch = [&]() -> std::vector<std::string> {
    auto prompt = render_pgdg_span(catalog, spec, entity_type, budget.per_prompt_count, variant);
    auto outcome = client.complete(span_request(prompt, opts));
    if (!outcome.ok()) return {};
    auto names = parse_numbered_list(outcome.result->text);
    std::vector<std::string> cleaned;
    for (auto& name : names) {
      std::string entity = trim(name);
      if (!entity.empty()) cleaned.push_back(std::move(entity));
    }
    return cleaned;
  };
  auto key = [](const std::string& entity) { return fold_case(entity); };
  auto [entities, stalled] =
      accumulate_until<std::string>(budget.per_label_cap, fetch, key, &result.completions);
  result.entities = std::move(entities);
  result.stalled = stalled;
  return result;
}

TripletPoolResult generate_triplet_pool(CompletionClient& client, const TemplateCatalog& catalog,
                                        const TaskSpec& spec, const std::string& label,
                                        const GenerationBudget& budget, const GenOptions& opts) {
  TripletPoolResult result;
  std::string variant = opts.span_variant.empty() ? "pgdg-aste-1" : opts.span_variant;
  const PromptTemplate& t = catalog.require(variant);
  int parse_variant = t.family == PromptFamily::PgdgAsteSentimentConditioned ? 3
                      : t.family == PromptFamily::PgdgAsteParallel           ? 2
                                                                             : 1;
  auto fetch = [&]() -> std::vector<SurfaceTriplet> {
    auto prompt = render_pgdg_span(catalog, spec, label, budget.per_prompt_count, variant);
    auto outcome = client.complete(span_request(prompt, opts));
    if (!outcome.ok()) return {};
    // The completion continues the primer; reattach it so the first line
    // parses like the rest.
    std::string text = prompt.answer_prefix + outcome.result->text;
    return parse_generated_triplets(text, parse_variant);
  };
  auto key = [](const SurfaceTriplet& t) {
    return fold_case(t.target) + "\x1f" + fold_case(t.opinion) + "\x1f" + to_string(t.sentiment);
  };
  auto [triplets, stalled] =
      accumulate_until<SurfaceTriplet>(budget.per_label_cap, fetch, key, &result.completions);
  result.triplets = std::move(triplets);
  result.stalled = stalled;
  return result;
}

TextPoolResult generate_classification_texts(CompletionClient& client,
                                             const TemplateCatalog& catalog, const TaskSpec& spec,
                                             const std::string& label,
                                             const GenerationBudget& budget,
                                             const GenOptions& opts) {
  TextPoolResult result;
  auto fetch = [&]() -> std::vector<std::string> {
    auto prompt =
        render_pgdg_span(catalog, spec, label, budget.per_prompt_count, opts.span_variant);
    auto outcome = client.complete(span_request(prompt, opts));
    if (!outcome.ok()) return {};
    return parse_generated_texts(outcome.result->text);
  };
  auto key = [](const std::string& text) { return fold_case(text); };
  auto [texts, stalled] =
      accumulate_until<std::string>(budget.per_label_cap, fetch, key, &result.completions);
  result.texts = std::move(texts);
  result.stalled = stalled;
  return result;
}

// ---------------------------------------------------------------------------
// Seed assembly

std::vector<SpanSeed> assemble_ner_seeds(
    const std::map<std::string, std::vector<std::string>>& pools, const GenerationBudget& budget,
    std::uint64_t rng_seed, std::size_t seed_count, SeedSource source) {
  std::vector<std::pair<std::string, std::string>> union_pool;  // (type, surface)
  for (const auto& [type, entities] : pools) {
    for (const auto& entity : entities) union_pool.emplace_back(type, entity);
  }
  std::size_t k_min = static_cast<std::size_t>(std::max(1, budget.entities_per_sentence_min));
  std::size_t k_max = static_cast<std::size_t>(
      std::max(budget.entities_per_sentence_min, budget.entities_per_sentence_max));
  if (union_pool.size() < k_min) {
    throw std::invalid_argument("entity pool smaller than entities_per_sentence minimum");
  }
  Rng rng(rng_seed);
  std::vector<SpanSeed> seeds;
  seeds.reserve(seed_count);
  for (std::size_t i = 0; i < seed_count; ++i) {
    std::size_t k = rng.between(k_min, std::min(k_max, union_pool.size()));
    NerSeed seed;
    for (std::size_t idx : rng.sample_without_replacement(union_pool.size(), k)) {
      seed.entities.push_back(union_pool[idx]);
    }
    seeds.push_back({std::move(seed), source});
  }
  return seeds;
}

std::vector<SpanSeed> assemble_aste_seeds(const std::vector<SurfaceTriplet>& pool,
                                          const GenerationBudget& budget, std::uint64_t rng_seed,
                                          std::size_t seed_count, SeedSource source) {
  std::size_t k_min = static_cast<std::size_t>(std::max(1, budget.entities_per_sentence_min));
  std::size_t k_max = static_cast<std::size_t>(
      std::max(budget.entities_per_sentence_min, budget.entities_per_sentence_max));
  Rng rng(rng_seed);
  std::vector<SpanSeed> seeds;
  std::size_t cursor = 0;
  while (cursor < pool.size() && (seed_count == 0 || seeds.size() < seed_count)) {
    std::size_t k = rng.between(k_min, k_max);
    k = std::min(k, pool.size() - cursor);
    AsteSeed seed;
    for (std::size_t i = 0; i < k; ++i) seed.triplets.push_back(pool[cursor + i]);
    cursor += k;
    seeds.push_back({std::move(seed), source});
  }
  return seeds;
}

// ---------------------------------------------------------------------------
// Sentence stage

std::vector<SentenceGenShot> sentence_shots_from(const TaskSpec& spec) {
  std::vector<SentenceGenShot> shots;
  for (const auto& shot : spec.shots) {
    const auto& payload = shot.annotation.payload;
    switch (payload.index()) {
      case 0: {
        const auto& c = std::get<ClassificationInstance>(payload);
        shots.push_back({ClsSeed{c.label, ""}, c.text});
        break;
      }
      case 1: {
        const auto& r = std::get<RelationInstance>(payload);
        shots.push_back({ReSeed{r.head.surface, r.tail.surface, r.relation}, r.sentence});
        break;
      }
      case 2: {
        const auto& nr = std::get<NerInstance>(payload);
        NerSeed seed;
        for (const auto& span : nr.spans) seed.entities.emplace_back(span.entity_type, span.surface);
        if (!seed.entities.empty()) shots.push_back({std::move(seed), nr.sentence});
        break;
      }
      default: {
        const auto& as = std::get<AsteInstance>(payload);
        AsteSeed seed;
        for (const auto& t : as.triplets) {
          seed.triplets.push_back({t.target_surface, t.opinion_surface, t.sentiment});
        }
        if (!seed.triplets.empty()) shots.push_back({std::move(seed), as.sentence});
        break;
      }
    }
  }
  return shots;
}

namespace {

std::string sentence_from_completion(const std::string& text) {
  for (const auto& raw_line : split_lines(text)) {
    std::string line = trim(raw_line);
    if (line.empty()) continue;
    if (istarts_with(line, "text:")) line = trim(line.substr(5));
    return line;
  }
  return "";
}

// Builds the annotated instance for a verified sentence, or explains why
// verification failed.
struct Verification {
  bool ok = false;
  std::string reason;
  AnnotatedInstance instance;
};

Verification verify_seed_sentence(const TaskSpec& spec, const SpanSeed& seed,
                                  const std::string& sentence, Provenance provenance) {
  Verification v;
  if (sentence.empty()) {
    v.reason = "empty sentence";
    return v;
  }
  switch (seed.payload.index()) {
    case 0: {  // classification
      const auto& cls = std::get<ClsSeed>(seed.payload);
      auto canonical = spec.label_space.canonical(cls.label);
      if (!canonical) {
        v.reason = "unknown label " + cls.label;
        return v;
      }
      v.instance.payload = ClassificationInstance{sentence, *canonical};
      break;
    }
    case 1: {  // relation: containment check for head and tail
      const auto& re = std::get<ReSeed>(seed.payload);
      if (sentence.find(re.head) == std::string::npos) {
        v.reason = "head '" + re.head + "' missing from sentence";
        return v;
      }
      if (sentence.find(re.tail) == std::string::npos) {
        v.reason = "tail '" + re.tail + "' missing from sentence";
        return v;
      }
      RelationInstance rel;
      rel.sentence = sentence;
      rel.head.surface = re.head;
      rel.tail.surface = re.tail;
      rel.relation = re.relation;
      v.instance.payload = std::move(rel);
      break;
    }
    case 2: {  // ner: every entity aligned at exact token-bounded offsets
      const auto& ner = std::get<NerSeed>(seed.payload);
      std::vector<EntitySpan> spans;
      for (const auto& [type, surface] : ner.entities) {
        auto aligned = align_span(sentence, surface);
        if (!aligned) {
          v.reason = "entity '" + surface + "' missing from sentence";
          return v;
        }
        EntitySpan span;
        span.start = aligned->first;
        span.end = aligned->second;
        span.surface = sentence.substr(span.start, span.end - span.start);
        span.entity_type = type;
        spans.push_back(std::move(span));
      }
      for (std::size_t a = 0; a < spans.size(); ++a) {
        for (std::size_t b = a + 1; b < spans.size(); ++b) {
          if (spans[a].start < spans[b].end && spans[b].start < spans[a].end) {
            v.reason = "entities '" + spans[a].surface + "' and '" + spans[b].surface +
                       "' overlap in the sentence";
            return v;
          }
        }
      }
      std::sort(spans.begin(), spans.end(),
                [](const EntitySpan& x, const EntitySpan& y) { return x.start < y.start; });
      v.instance.payload = NerInstance{sentence, std::move(spans)};
      break;
    }
    default: {  // aste: targets and opinions aligned to token indices
      const auto& aste = std::get<AsteSeed>(seed.payload);
      auto tokens = tokenize(sentence);
      AsteInstance inst;
      inst.sentence = sentence;
      for (const auto& st : aste.triplets) {
        auto target_idx = align_token_sequence(tokens, st.target);
        auto opinion_idx = align_token_sequence(tokens, st.opinion);
        if (!target_idx || !opinion_idx) {
          v.reason = "triplet '" + st.target + "'/'" + st.opinion + "' missing from sentence";
          return v;
        }
        AsteTriplet t;
        t.target = *target_idx;
        t.opinion = *opinion_idx;
        t.sentiment = st.sentiment;
        std::vector<std::string> parts;
        for (auto idx : *target_idx) parts.push_back(tokens[idx].text);
        t.target_surface = join(parts, " ");
        parts.clear();
        for (auto idx : *opinion_idx) parts.push_back(tokens[idx].text);
        t.opinion_surface = join(parts, " ");
        inst.triplets.push_back(std::move(t));
      }
      v.instance.payload = std::move(inst);
      break;
    }
  }
  v.instance.provenance = provenance;
  v.ok = true;
  return v;
}

std::string seed_summary(const SpanSeed& seed) {
  switch (seed.payload.index()) {
    case 0: {
      const auto& cls = std::get<ClsSeed>(seed.payload);
      return cls.entity.empty() ? cls.label : cls.label + " / " + cls.entity;
    }
    case 1: {
      const auto& re = std::get<ReSeed>(seed.payload);
      return re.head + " / " + re.tail + " / " + re.relation;
    }
    case 2: {
      const auto& ner = std::get<NerSeed>(seed.payload);
      std::vector<std::string> parts;
      for (const auto& [type, surface] : ner.entities) parts.push_back(type + ": " + surface);
      return join(parts, "; ");
    }
    default: {
      const auto& aste = std::get<AsteSeed>(seed.payload);
      std::vector<std::string> parts;
      for (const auto& t : aste.triplets) parts.push_back(t.target + "/" + t.opinion);
      return join(parts, "; ");
    }
  }
}

}  // namespace

GenerationRun generate_sentences(CompletionClient& client, const TemplateCatalog& catalog,
                                 const TaskSpec& spec, const std::vector<SpanSeed>& seeds,
                                 const std::vector<SentenceGenShot>& shots,
                                 const GenOptions& opts) {
  GenerationRun run;
  std::vector<AnnotatedInstance> slots(seeds.size());
  std::vector<bool> verified(seeds.size(), false);
  std::vector<std::string> last_reason(seeds.size());

  std::vector<std::size_t> outstanding(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) outstanding[i] = i;

  // First pass plus one retry round for seeds whose sentence failed
  // verification.
  for (int attempt = 0; attempt < 2 && !outstanding.empty(); ++attempt) {
    std::vector<CompletionRequest> reqs;
    reqs.reserve(outstanding.size());
    for (std::size_t idx : outstanding) {
      auto prompt =
          render_sentence_gen(catalog, spec, seeds[idx].payload, shots, opts.sentence_variant);
      reqs.push_back(sentence_request(prompt, opts));
    }
    auto outcomes = client.complete_batch(std::move(reqs), opts.parallelism);
    run.sentence_completions += outcomes.size();

    std::vector<std::size_t> still_failing;
    for (std::size_t k = 0; k < outstanding.size(); ++k) {
      std::size_t idx = outstanding[k];
      if (!outcomes[k].ok()) {
        last_reason[idx] = std::string(to_string(outcomes[k].error->kind)) + ": " +
                           outcomes[k].error->message;
        still_failing.push_back(idx);
        continue;
      }
      std::string sentence = sentence_from_completion(outcomes[k].result->text);
      auto v = verify_seed_sentence(spec, seeds[idx], sentence, opts.provenance);
      if (v.ok) {
        slots[idx] = std::move(v.instance);
        verified[idx] = true;
      } else {
        last_reason[idx] = v.reason;
        still_failing.push_back(idx);
      }
    }
    outstanding = std::move(still_failing);
  }

  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (verified[i]) {
      run.instances.push_back(std::move(slots[i]));
    } else {
      run.dropped.push_back({seed_summary(seeds[i]), last_reason[i]});
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Full pipelines

namespace {

// No two emitted instances share (normalized sentence, annotation).
void dedup_instances(GenerationRun& run) {
  run.instances = dedup(run.instances);
}

std::vector<AnnotatedInstance> cap_per_label(const std::vector<AnnotatedInstance>& instances,
                                             const TaskSpec& spec, int cap) {
  if (cap <= 0) return instances;
  std::map<std::string, int> counts;
  std::vector<AnnotatedInstance> out;
  for (const auto& inst : instances) {
    std::string label;
    if (const auto* c = std::get_if<ClassificationInstance>(&inst.payload)) label = c->label;
    if (const auto* r = std::get_if<RelationInstance>(&inst.payload)) label = r->relation;
    if (label.empty()) {
      out.push_back(inst);  // token-level kinds are capped at the seed stage
      continue;
    }
    if (counts[fold_case(label)] < cap) {
      ++counts[fold_case(label)];
      out.push_back(inst);
    }
  }
  (void)spec;
  return out;
}

}  // namespace

GenerationRun run_pgdg(CompletionClient& client, const TemplateCatalog& catalog,
                       const TaskSpec& spec, const GenerationBudget& budget,
                       const GenOptions& opts) {
  GenerationRun run;
  auto shots = sentence_shots_from(spec);

  switch (spec.kind) {
    case TaskKind::Classification: {
      for (const auto& label : spec.label_space.labels) {
        auto pool = generate_classification_texts(client, catalog, spec, label, budget, opts);
        run.span_completions += pool.completions;
        if (pool.stalled) run.notes.push_back("span generation stalled for label " + label);
        for (auto& text : pool.texts) {
          AnnotatedInstance inst;
          inst.payload = ClassificationInstance{text, label};
          inst.provenance = opts.provenance;
          run.instances.push_back(std::move(inst));
        }
      }
      break;
    }
    case TaskKind::RelationExtraction: {
      std::vector<SpanSeed> seeds;
      for (const auto& label : spec.label_space.labels) {
        auto pool = generate_pairs(client, catalog, spec, label, budget, opts);
        run.span_completions += pool.completions;
        if (pool.stalled) run.notes.push_back("span generation stalled for label " + label);
        for (auto& pair : pool.pairs) seeds.push_back({std::move(pair), SeedSource::Generated});
      }
      auto sentences = generate_sentences(client, catalog, spec, seeds, shots, opts);
      run.instances = std::move(sentences.instances);
      run.dropped = std::move(sentences.dropped);
      run.sentence_completions = sentences.sentence_completions;
      break;
    }
    case TaskKind::Ner: {
      std::map<std::string, std::vector<std::string>> pools;
      for (const auto& label : spec.label_space.labels) {
        auto pool = generate_entity_pool(client, catalog, spec, label, budget, opts);
        run.span_completions += pool.completions;
        if (pool.stalled) run.notes.push_back("span generation stalled for label " + label);
        pools[label] = std::move(pool.entities);
      }
      std::size_t count = budget.sentence_count > 0 ? static_cast<std::size_t>(budget.sentence_count)
                                                    : 0;
      if (count == 0) {
        for (const auto& [_, entities] : pools) count += entities.size();
      }
      auto seeds = assemble_ner_seeds(pools, budget, opts.rng_seed, count);
      auto sentences = generate_sentences(client, catalog, spec, seeds, shots, opts);
      run.instances = std::move(sentences.instances);
      run.dropped = std::move(sentences.dropped);
      run.sentence_completions = sentences.sentence_completions;
      break;
    }
    case TaskKind::Aste: {
      std::vector<SurfaceTriplet> pool;
      std::string variant = opts.span_variant.empty() ? "pgdg-aste-1" : opts.span_variant;
      bool per_sentiment =
          catalog.require(variant).family == PromptFamily::PgdgAsteSentimentConditioned;
      std::vector<std::string> labels =
          per_sentiment ? spec.label_space.labels
                        : std::vector<std::string>{spec.label_space.labels.front()};
      for (const auto& label : labels) {
        auto part = generate_triplet_pool(client, catalog, spec, label, budget, opts);
        run.span_completions += part.completions;
        if (part.stalled) run.notes.push_back("span generation stalled for label " + label);
        for (auto& t : part.triplets) pool.push_back(std::move(t));
      }
      auto seeds = assemble_aste_seeds(pool, budget, opts.rng_seed,
                                       static_cast<std::size_t>(budget.sentence_count));
      auto sentences = generate_sentences(client, catalog, spec, seeds, shots, opts);
      run.instances = std::move(sentences.instances);
      run.dropped = std::move(sentences.dropped);
      run.sentence_completions = sentences.sentence_completions;
      break;
    }
  }

  dedup_instances(run);
  run.instances = cap_per_label(run.instances, spec, budget.per_label_cap);
  return run;
}

GenerationRun run_dadg(CompletionClient& client, const TemplateCatalog& catalog,
                       const TaskSpec& spec, const DictSeeds& dict, const GenerationBudget& budget,
                       const GenOptions& opts) {
  GenerationRun run;
  auto shots = sentence_shots_from(spec);
  GenOptions dadg_opts = opts;
  dadg_opts.provenance = Provenance::Dadg;

  switch (spec.kind) {
    case TaskKind::Classification: {
      if (dict.plain_entities.empty()) {
        run.notes.push_back("dictionary empty: no entities for classification");
        break;
      }
      std::vector<SpanSeed> seeds;
      for (const auto& label : spec.label_space.labels) {
        std::size_t take = std::min<std::size_t>(dict.plain_entities.size(),
                                                 static_cast<std::size_t>(budget.per_label_cap));
        for (std::size_t i = 0; i < take; ++i) {
          seeds.push_back({ClsSeed{label, dict.plain_entities[i]}, SeedSource::Dictionary});
        }
      }
      auto sentences = generate_sentences(client, catalog, spec, seeds, shots, dadg_opts);
      run.instances = std::move(sentences.instances);
      run.dropped = std::move(sentences.dropped);
      run.sentence_completions = sentences.sentence_completions;
      break;
    }
    case TaskKind::RelationExtraction: {
      std::vector<SpanSeed> seeds;
      for (const auto& label : spec.label_space.labels) {
        auto it = dict.pairs.find(label);
        if (it == dict.pairs.end() || it->second.empty()) {
          run.notes.push_back("dictionary empty for relation " + label);
          continue;
        }
        std::size_t take = std::min<std::size_t>(it->second.size(),
                                                 static_cast<std::size_t>(budget.per_label_cap));
        for (std::size_t i = 0; i < take; ++i) {
          seeds.push_back({it->second[i], SeedSource::Dictionary});
        }
      }
      auto sentences = generate_sentences(client, catalog, spec, seeds, shots, dadg_opts);
      run.instances = std::move(sentences.instances);
      run.dropped = std::move(sentences.dropped);
      run.sentence_completions = sentences.sentence_completions;
      break;
    }
    case TaskKind::Ner: {
      std::map<std::string, std::vector<std::string>> pools;
      for (const auto& label : spec.label_space.labels) {
        auto it = dict.entity_pools.find(label);
        if (it == dict.entity_pools.end() || it->second.empty()) {
          run.notes.push_back("dictionary empty for entity type " + label);
          continue;
        }
        auto& pool = pools[label];
        std::size_t take = std::min<std::size_t>(it->second.size(),
                                                 static_cast<std::size_t>(budget.per_label_cap));
        pool.assign(it->second.begin(), it->second.begin() + static_cast<long>(take));
      }
      if (pools.empty()) {
        run.notes.push_back("dictionary empty: no entity pools");
        break;
      }
      std::size_t count = budget.sentence_count > 0 ? static_cast<std::size_t>(budget.sentence_count)
                                                    : 0;
      if (count == 0) {
        for (const auto& [_, entities] : pools) count += entities.size();
      }
      auto seeds = assemble_ner_seeds(pools, budget, opts.rng_seed, count, SeedSource::Dictionary);
      auto sentences = generate_sentences(client, catalog, spec, seeds, shots, dadg_opts);
      run.instances = std::move(sentences.instances);
      run.dropped = std::move(sentences.dropped);
      run.sentence_completions = sentences.sentence_completions;
      break;
    }
    case TaskKind::Aste: {
      if (dict.aspects.empty()) {
        run.notes.push_back("dictionary empty: no aspects");
        break;
      }
      // Opinion/sentiment generation for each dictionary aspect with the
      // configured span prompt, then the usual sentence stage.
      std::string variant = opts.span_variant.empty() ? "pgdg-aste-1" : opts.span_variant;
      const PromptTemplate& t = catalog.require(variant);
      int parse_variant = t.family == PromptFamily::PgdgAsteSentimentConditioned ? 3
                          : t.family == PromptFamily::PgdgAsteParallel           ? 2
                                                                                 : 1;
      std::size_t take = std::min<std::size_t>(dict.aspects.size(),
                                               static_cast<std::size_t>(budget.per_label_cap));
      std::vector<CompletionRequest> reqs;
      std::vector<std::string> primers;
      for (std::size_t i = 0; i < take; ++i) {
        auto prompt = render_aste_opinion_gen(catalog, spec, dict.aspects[i], variant,
                                              budget.per_prompt_count);
        primers.push_back(prompt.answer_prefix);
        reqs.push_back(span_request(prompt, opts));
      }
      auto outcomes = client.complete_batch(std::move(reqs), opts.parallelism);
      run.span_completions += outcomes.size();

      std::vector<SurfaceTriplet> pool;
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].ok()) {
          run.notes.push_back("opinion generation failed for aspect " + dict.aspects[i]);
          continue;
        }
        std::string text = primers[i] + outcomes[i].result->text;
        auto triplets = parse_generated_triplets(text, parse_variant);
        if (triplets.empty()) {
          run.notes.push_back("no parseable opinion for aspect " + dict.aspects[i]);
          continue;
        }
        pool.push_back(triplets.front());
      }
      auto seeds = assemble_aste_seeds(pool, budget, opts.rng_seed,
                                       static_cast<std::size_t>(budget.sentence_count),
                                       SeedSource::Dictionary);
      auto sentences = generate_sentences(client, catalog, spec, seeds, shots, dadg_opts);
      run.instances = std::move(sentences.instances);
      run.dropped = std::move(sentences.dropped);
      run.sentence_completions = sentences.sentence_completions;
      break;
    }
  }

  dedup_instances(run);
  run.instances = cap_per_label(run.instances, spec, budget.per_label_cap);
  return run;
}

}  // namespace annotis
