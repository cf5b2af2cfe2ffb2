#include "annotis/pgda.hpp"

#include <algorithm>

#include "annotis/align.hpp"
#include "annotis/parsers.hpp"
#include "annotis/text.hpp"

namespace annotis {

namespace {

CompletionRequest make_request(const RenderedPrompt& prompt, const PipelineOptions& opts) {
  CompletionRequest req;
  req.prompt = prompt.text;
  req.max_tokens = opts.max_tokens;
  req.temperature = opts.temperature;
  req.stop_sequences = prompt.stop_sequences;
  return req;
}

std::string describe_error(const BackendError& error) {
  return std::string(to_string(error.kind)) + ": " + error.message;
}

int aste_variant_of(const std::string& template_id) {
  if (template_id.empty()) return 1;
  char last = template_id.back();
  return (last >= '1' && last <= '9') ? last - '0' : 1;
}

}  // namespace

AnnotationRun annotate_classification(CompletionClient& client, const TemplateCatalog& catalog,
                                      const TaskSpec& spec, const std::string& variant,
                                      const std::vector<UnlabeledItem>& items,
                                      const PipelineOptions& opts) {
  AnnotationRun run;
  run.variant = variant;
  std::vector<CompletionRequest> reqs;
  reqs.reserve(items.size());
  for (const auto& item : items) {
    reqs.push_back(make_request(render_pgda(catalog, spec, variant, {item.text, "", ""}), opts));
  }
  auto outcomes = client.complete_batch(std::move(reqs), opts.parallelism);
  run.stats.completions_issued = outcomes.size();

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok()) {
      run.dropped.push_back({items[i].text, describe_error(*outcomes[i].error)});
      continue;
    }
    auto parsed = parse_label(outcomes[i].result->text, spec.label_space);
    if (!parsed.ok()) {
      run.dropped.push_back({items[i].text,
                             std::string("parse: ") + to_string(parsed.failure_info().reason)});
      continue;
    }
    AnnotatedInstance inst;
    inst.payload = ClassificationInstance{items[i].text, parsed.value()};
    inst.provenance = opts.provenance;
    run.outputs.push_back(std::move(inst));
  }
  return run;
}

AnnotationRun annotate_relation(CompletionClient& client, const TemplateCatalog& catalog,
                                const TaskSpec& spec, const std::string& variant,
                                const std::vector<UnlabeledItem>& items,
                                const PipelineOptions& opts) {
  AnnotationRun run;
  run.variant = variant;
  std::vector<CompletionRequest> reqs;
  reqs.reserve(items.size());
  for (const auto& item : items) {
    reqs.push_back(
        make_request(render_pgda(catalog, spec, variant, {item.text, item.head, item.tail}), opts));
  }
  auto outcomes = client.complete_batch(std::move(reqs), opts.parallelism);
  run.stats.completions_issued = outcomes.size();

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok()) {
      run.dropped.push_back({items[i].text, describe_error(*outcomes[i].error)});
      continue;
    }
    auto parsed = parse_label(outcomes[i].result->text, spec.label_space);
    if (!parsed.ok()) {
      run.dropped.push_back({items[i].text,
                             std::string("parse: ") + to_string(parsed.failure_info().reason)});
      continue;
    }
    RelationInstance rel;
    rel.sentence = items[i].text;
    rel.head.surface = items[i].head;
    rel.tail.surface = items[i].tail;
    rel.relation = parsed.value();
    AnnotatedInstance inst;
    inst.payload = std::move(rel);
    inst.provenance = opts.provenance;
    run.outputs.push_back(std::move(inst));
  }
  return run;
}

AnnotationRun annotate_aste(CompletionClient& client, const TemplateCatalog& catalog,
                            const TaskSpec& spec, const std::string& variant,
                            const std::vector<UnlabeledItem>& items, const PipelineOptions& opts) {
  AnnotationRun run;
  run.variant = variant;
  const int parse_variant = aste_variant_of(variant);

  std::vector<CompletionRequest> reqs;
  reqs.reserve(items.size());
  for (const auto& item : items) {
    reqs.push_back(make_request(render_pgda(catalog, spec, variant, {item.text, "", ""}), opts));
  }
  auto outcomes = client.complete_batch(std::move(reqs), opts.parallelism);
  run.stats.completions_issued = outcomes.size();

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok()) {
      run.dropped.push_back({items[i].text, describe_error(*outcomes[i].error)});
      continue;
    }
    auto parsed = parse_aste(outcomes[i].result->text, parse_variant);
    if (!parsed.ok()) {
      run.dropped.push_back({items[i].text,
                             std::string("parse: ") + to_string(parsed.failure_info().reason)});
      continue;
    }
    auto tokens = tokenize(items[i].text);
    AsteInstance aste;
    aste.sentence = items[i].text;
    for (const auto& surface : parsed.value()) {
      auto target_idx = align_token_sequence(tokens, surface.target);
      auto opinion_idx = align_token_sequence(tokens, surface.opinion);
      if (!target_idx || !opinion_idx) {
        run.notes.push_back("triplet dropped (no alignment) in item " + std::to_string(i) + ": " +
                            surface.target + " / " + surface.opinion);
        continue;
      }
      AsteTriplet triplet;
      triplet.target = *target_idx;
      triplet.opinion = *opinion_idx;
      triplet.sentiment = surface.sentiment;
      std::vector<std::string> parts;
      for (auto idx : *target_idx) parts.push_back(tokens[idx].text);
      triplet.target_surface = join(parts, " ");
      parts.clear();
      for (auto idx : *opinion_idx) parts.push_back(tokens[idx].text);
      triplet.opinion_surface = join(parts, " ");
      aste.triplets.push_back(std::move(triplet));
    }
    AnnotatedInstance inst;
    inst.payload = std::move(aste);
    inst.provenance = opts.provenance;
    run.outputs.push_back(std::move(inst));
  }
  return run;
}

// ---------------------------------------------------------------------------
// NER

const std::string* DefinitionStore::find(const std::string& type) const {
  auto it = definitions_.find(type);
  return it == definitions_.end() ? nullptr : &it->second;
}

void DefinitionStore::put(const std::string& type, std::string definition) {
  definitions_[type] = std::move(definition);
}

std::vector<NerTypeShot> type_shots_for(const TaskSpec& spec, const std::string& entity_type) {
  std::vector<NerTypeShot> shots;
  for (const auto& shot : spec.shots) {
    const auto* nr = std::get_if<NerInstance>(&shot.annotation.payload);
    if (!nr) continue;
    NerTypeShot type_shot;
    type_shot.sentence = nr->sentence;
    for (const auto& span : nr->spans) {
      if (fold_case(span.entity_type) == fold_case(entity_type)) {
        type_shot.entities.push_back(span.surface);
      }
    }
    if (!type_shot.entities.empty()) shots.push_back(std::move(type_shot));
  }
  return shots;
}

std::size_t ensure_type_definitions(CompletionClient& client, const TemplateCatalog& catalog,
                                    const TaskSpec& spec, const PipelineOptions& opts,
                                    DefinitionStore& definitions) {
  std::vector<std::string> missing;
  for (const auto& label : spec.label_space.labels) {
    if (definitions.find(label)) continue;
    if (const std::string* d = spec.label_space.definition_of(label)) {
      definitions.put(label, *d);
      continue;
    }
    missing.push_back(label);
  }
  if (missing.empty()) return 0;

  std::vector<CompletionRequest> reqs;
  for (const auto& label : missing) {
    reqs.push_back(make_request(render_type_definition(catalog, spec, label), opts));
  }
  auto outcomes = client.complete_batch(std::move(reqs), opts.parallelism);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    std::string definition =
        outcomes[i].ok() ? trim(outcomes[i].result->text) : std::string();
    if (definition.empty()) {
      // Keep the pass usable even when the definition call failed.
      definition = "An entity of type '" + missing[i] + "'.";
    }
    definitions.put(missing[i], definition);
  }
  return outcomes.size();
}

AnnotationRun annotate_ner(CompletionClient& client, const TemplateCatalog& catalog,
                           const TaskSpec& spec, const std::vector<UnlabeledItem>& items,
                           const PipelineOptions& opts, DefinitionStore& definitions) {
  AnnotationRun run;
  run.variant = "ner-type-pass";
  run.stats.definition_completions =
      ensure_type_definitions(client, catalog, spec, opts, definitions);

  const auto& types = spec.label_space.labels;

  // One extraction prompt per (sentence, type), sentence-major so ordinals
  // are deterministic.
  std::vector<CompletionRequest> reqs;
  reqs.reserve(items.size() * types.size());
  for (const auto& item : items) {
    for (const auto& type : types) {
      const std::string* def = definitions.find(type);
      reqs.push_back(make_request(
          render_ner_type_pass(catalog, spec, type, def ? *def : "", type_shots_for(spec, type),
                               item.text),
          opts));
    }
  }
  auto outcomes = client.complete_batch(std::move(reqs), opts.parallelism);
  run.stats.completions_issued = outcomes.size();

  // Aligned candidates per sentence, in (type, response order): surface ->
  // proposed types. Alignment happens before disambiguation so absent
  // surfaces never waste a completion.
  struct AlignedCandidate {
    std::string surface;          // exact sentence slice
    std::size_t start = 0, end = 0;
    std::vector<std::string> types;  // label-space order
  };
  std::vector<std::vector<AlignedCandidate>> per_sentence(items.size());

  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& candidates = per_sentence[i];
    for (std::size_t t = 0; t < types.size(); ++t) {
      const auto& outcome = outcomes[i * types.size() + t];
      if (!outcome.ok()) {
        run.notes.push_back("type pass failed for sentence " + std::to_string(i) + " type " +
                            types[t] + ": " + describe_error(*outcome.error));
        continue;
      }
      for (const auto& raw_surface : parse_entity_list(outcome.result->text)) {
        auto aligned = align_span(items[i].text, raw_surface);
        if (!aligned) continue;  // candidate absent from the sentence
        std::string slice = items[i].text.substr(aligned->first,
                                                 aligned->second - aligned->first);
        auto it = std::find_if(candidates.begin(), candidates.end(), [&](const AlignedCandidate& c) {
          return c.start == aligned->first && c.end == aligned->second;
        });
        if (it == candidates.end()) {
          candidates.push_back({slice, aligned->first, aligned->second, {types[t]}});
        } else if (std::find(it->types.begin(), it->types.end(), types[t]) == it->types.end()) {
          it->types.push_back(types[t]);
        }
      }
    }
  }

  // Disambiguation pass for every candidate proposed under >= 2 types.
  struct Pending {
    std::size_t sentence;
    std::size_t candidate;
  };
  std::vector<Pending> pending;
  std::vector<CompletionRequest> disamb_reqs;
  for (std::size_t i = 0; i < per_sentence.size(); ++i) {
    for (std::size_t c = 0; c < per_sentence[i].size(); ++c) {
      const auto& cand = per_sentence[i][c];
      if (cand.types.size() < 2) continue;
      pending.push_back({i, c});
      disamb_reqs.push_back(make_request(
          render_disambiguation(catalog, items[i].text, cand.surface, cand.types), opts));
    }
  }
  auto disamb_outcomes = client.complete_batch(std::move(disamb_reqs), opts.parallelism);
  run.stats.disambiguation_completions = disamb_outcomes.size();
  run.stats.completions_issued += disamb_outcomes.size();

  std::vector<std::vector<std::string>> resolved_type(per_sentence.size());
  for (std::size_t i = 0; i < per_sentence.size(); ++i) {
    resolved_type[i].resize(per_sentence[i].size());
    for (std::size_t c = 0; c < per_sentence[i].size(); ++c) {
      resolved_type[i][c] = per_sentence[i][c].types.front();
    }
  }
  for (std::size_t k = 0; k < pending.size(); ++k) {
    const auto& cand = per_sentence[pending[k].sentence][pending[k].candidate];
    std::string fallback = cand.types.front();  // earliest type pass in label-space order
    std::string chosen = fallback;
    bool fell_back = true;
    if (disamb_outcomes[k].ok()) {
      auto parsed = parse_label(disamb_outcomes[k].result->text, spec.label_space);
      if (parsed.ok()) {
        bool in_candidates =
            std::find(cand.types.begin(), cand.types.end(), parsed.value()) != cand.types.end();
        if (in_candidates) {
          chosen = parsed.value();
          fell_back = false;
        }
      }
    }
    if (fell_back) {
      run.notes.push_back("disambiguation fallback for '" + cand.surface + "' in sentence " +
                          std::to_string(pending[k].sentence) + ": kept " + fallback);
    }
    resolved_type[pending[k].sentence][pending[k].candidate] = chosen;
  }

  // Spans per sentence with longest-first overlap resolution.
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::vector<EntitySpan> spans;
    for (std::size_t c = 0; c < per_sentence[i].size(); ++c) {
      const auto& cand = per_sentence[i][c];
      spans.push_back({cand.surface, cand.start, cand.end, resolved_type[i][c]});
    }
    std::stable_sort(spans.begin(), spans.end(), [&](const EntitySpan& a, const EntitySpan& b) {
      std::size_t la = a.end - a.start, lb = b.end - b.start;
      if (la != lb) return la > lb;
      return a.start < b.start;
    });
    std::vector<EntitySpan> kept;
    for (const auto& span : spans) {
      bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const EntitySpan& k) {
        return span.start < k.end && k.start < span.end;
      });
      if (!overlaps) kept.push_back(span);
    }
    std::sort(kept.begin(), kept.end(),
              [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });

    AnnotatedInstance inst;
    inst.payload = NerInstance{items[i].text, std::move(kept)};
    inst.provenance = opts.provenance;
    run.outputs.push_back(std::move(inst));
  }
  return run;
}

}  // namespace annotis
