#include "annotis/prompts.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "annotis/text.hpp"

namespace annotis {

using nlohmann::json;

const char* to_string(PromptFamily family) {
  switch (family) {
    case PromptFamily::PgdaClassification: return "pgda_classification";
    case PromptFamily::PgdaRelation: return "pgda_relation";
    case PromptFamily::PgdaRelationWithDefs: return "pgda_relation_with_defs";
    case PromptFamily::PgdaAsteIndexed: return "pgda_aste_indexed";
    case PromptFamily::PgdaAsteParallel: return "pgda_aste_parallel";
    case PromptFamily::PgdgClassification: return "pgdg_classification";
    case PromptFamily::DadgClassification: return "dadg_classification";
    case PromptFamily::PgdgRelationPairs: return "pgdg_relation_pairs";
    case PromptFamily::PgdgNerEntities: return "pgdg_ner_entities";
    case PromptFamily::PgdgAsteIndexed: return "pgdg_aste_indexed";
    case PromptFamily::PgdgAsteParallel: return "pgdg_aste_parallel";
    case PromptFamily::PgdgAsteSentimentConditioned: return "pgdg_aste_sentiment_conditioned";
    case PromptFamily::SentenceGenRelation: return "sentence_gen_relation";
    case PromptFamily::SentenceGenNer: return "sentence_gen_ner";
    case PromptFamily::SentenceGenAste: return "sentence_gen_aste";
    case PromptFamily::NerTypePass: return "ner_type_pass";
    case PromptFamily::NerDisambiguation: return "ner_disambiguation";
    case PromptFamily::NerTypeDefinition: return "ner_type_definition";
  }
  return "unknown";
}

std::optional<PromptFamily> prompt_family_from_string(const std::string& name) {
  static const std::vector<PromptFamily> all = {
      PromptFamily::PgdaClassification,
      PromptFamily::PgdaRelation,
      PromptFamily::PgdaRelationWithDefs,
      PromptFamily::PgdaAsteIndexed,
      PromptFamily::PgdaAsteParallel,
      PromptFamily::PgdgClassification,
      PromptFamily::DadgClassification,
      PromptFamily::PgdgRelationPairs,
      PromptFamily::PgdgNerEntities,
      PromptFamily::PgdgAsteIndexed,
      PromptFamily::PgdgAsteParallel,
      PromptFamily::PgdgAsteSentimentConditioned,
      PromptFamily::SentenceGenRelation,
      PromptFamily::SentenceGenNer,
      PromptFamily::SentenceGenAste,
      PromptFamily::NerTypePass,
      PromptFamily::NerDisambiguation,
      PromptFamily::NerTypeDefinition,
  };
  std::string folded = fold_case(trim(name));
  for (auto f : all) {
    if (folded == to_string(f)) return f;
  }
  return std::nullopt;
}

const std::vector<std::string>& allowed_placeholders() {
  static const std::vector<std::string> names = {
      "text",        "label",      "label_lower",
      "head",        "tail",       "relation",
      "relation_definition",       "entity_type",
      "entity_type_cap",           "entity_type_definition",
      "entity_type_plural",        "entities",
      "entity",      "candidates", "target",
      "opinion",     "sentiment",  "domain",
      "count",       "index",
  };
  return names;
}

std::string render_format(const std::string& format,
                          const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(format.size());
  std::size_t i = 0;
  while (i < format.size()) {
    char c = format[i];
    if (c == '{') {
      std::size_t close = format.find('}', i + 1);
      if (close != std::string::npos) {
        std::string name = format.substr(i + 1, close - i - 1);
        auto it = values.find(name);
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
        bool known = std::find(allowed_placeholders().begin(), allowed_placeholders().end(),
                               name) != allowed_placeholders().end();
        if (known) {
          throw PromptError(PromptErrorKind::MissingField,
                            "no value for placeholder {" + name + "}");
        }
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::string capitalize_first(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') {
      c = static_cast<char>(c - 'a' + 'A');
      break;
    }
    if (c >= 'A' && c <= 'Z') break;
  }
  return out;
}

std::string pluralize(const std::string& s) {
  if (s.empty()) return s;
  if (s.back() == 's' || s.back() == 'x' || s.back() == 'z') return s + "es";
  if (ends_with(s, "ch") || ends_with(s, "sh")) return s + "es";
  if (s.size() >= 2 && s.back() == 'y') {
    char before = s[s.size() - 2];
    bool vowel = before == 'a' || before == 'e' || before == 'i' || before == 'o' || before == 'u';
    if (!vowel) return s.substr(0, s.size() - 1) + "ies";
  }
  return s + "s";
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

PromptTemplate make_template(std::string id, PromptFamily family, std::string instruction,
                             std::string example_fmt, std::string query_fmt,
                             bool mark_entities = false) {
  PromptTemplate t;
  t.template_id = std::move(id);
  t.family = family;
  t.instruction = std::move(instruction);
  t.example_block_format = std::move(example_fmt);
  t.query_block_format = std::move(query_fmt);
  t.mark_entities_in_text = mark_entities;
  return t;
}

void validate_placeholders(const PromptTemplate& t) {
  auto check = [&](const std::string& fmt) {
    std::size_t i = 0;
    while ((i = fmt.find('{', i)) != std::string::npos) {
      std::size_t close = fmt.find('}', i + 1);
      if (close == std::string::npos) break;
      std::string name = fmt.substr(i + 1, close - i - 1);
      bool known = std::find(allowed_placeholders().begin(), allowed_placeholders().end(),
                             name) != allowed_placeholders().end();
      if (!known) {
        throw PromptError(PromptErrorKind::BadTemplate,
                          "template " + t.template_id + " uses unknown placeholder {" + name + "}");
      }
      i = close + 1;
    }
  };
  check(t.instruction);
  check(t.example_block_format);
  check(t.query_block_format);
}

}  // namespace

TemplateCatalog TemplateCatalog::builtin() {
  TemplateCatalog catalog;

  catalog.register_template(make_template(
      "pgda-sst2", PromptFamily::PgdaClassification,
      "Choose the sentiment of the given text from Positive and Negative.",
      "Text: {text}\nSentiment: {label}", "Text: {text}\nSentiment:"));

  const std::string fewrel_instruction =
      "Identify the relation between the head entity and the tail entity in the given sentence.";

  catalog.register_template(make_template(
      "pgda-fewrel-1", PromptFamily::PgdaRelation, fewrel_instruction,
      "Sentence: {text}\nHead Entity: {head}; Tail Entity: {tail}\nRelation: {relation}",
      "Sentence: {text}\nHead Entity: {head}; Tail Entity: {tail}\nRelation:"));

  catalog.register_template(make_template(
      "pgda-fewrel-2", PromptFamily::PgdaRelation, fewrel_instruction,
      "Sentence: {text}\nthe relation between {head} and {tail} is {relation}",
      "Sentence: {text}\nthe relation between {head} and {tail} is"));

  catalog.register_template(make_template(
      "pgda-fewrel-3", PromptFamily::PgdaRelation, fewrel_instruction,
      "{text} Relation: {relation}", "{text} Relation:", /*mark_entities=*/true));

  catalog.register_template(make_template(
      "pgda-fewrel-4", PromptFamily::PgdaRelation, fewrel_instruction,
      "{text} <head> {head} <tail> {tail} <relation> {relation}",
      "{text} <head> {head} <tail> {tail} <relation>:"));

  catalog.register_template(make_template(
      "pgda-fewrel-5", PromptFamily::PgdaRelationWithDefs, fewrel_instruction,
      "Sentence: {text}\nHead Entity: {head}; Tail Entity: {tail}\nRelation: {relation}",
      "Sentence: {text}\nHead Entity: {head}; Tail Entity: {tail}\nRelation:"));

  const std::string aste_pgda_instruction =
      "Identify the target, opinion, and sentiment triplets in the given text.";

  catalog.register_template(make_template(
      "pgda-aste-1", PromptFamily::PgdaAsteIndexed, aste_pgda_instruction,
      "Target{index}: {target}; Opinion{index}: {opinion}; Sentiment{index}: {sentiment}",
      "Target0:"));

  catalog.register_template(make_template(
      "pgda-aste-2", PromptFamily::PgdaAsteParallel, aste_pgda_instruction,
      "Target: {target}\nOpinion: {opinion}\nSentiment: {sentiment}", "Target:"));

  catalog.register_template(make_template(
      "pgda-aste-3", PromptFamily::PgdaAsteIndexed, aste_pgda_instruction,
      "Target{index}: is {target}. Its opinion span is {opinion}. Its sentiment is {sentiment}.",
      "Target0: is"));

  catalog.register_template(make_template(
      "pgdg-sst2", PromptFamily::PgdgClassification,
      "Write {count} different movie reviews with {label_lower} sentiments with no more than 20 "
      "words.",
      "Sentiment: {label}\nText: {text}", "Sentiment: {label}\nText:"));

  catalog.register_template(make_template(
      "dadg-sst2", PromptFamily::DadgClassification,
      "Write a movie review with the given entity with {label_lower} sentiment.",
      "Sentiment: {label}\nText: {text}", "Entity: {entity}\nSentiment: {label}\nText:"));

  catalog.register_template(make_template(
      "pgdg-fewrel-pairs", PromptFamily::PgdgRelationPairs,
      "Generate {count} different Head Entity and Tail Entity with the given Relation.",
      "Relation: {relation}\nHead Entity: {head}; Tail Entity: {tail}", "Head Entity:"));

  catalog.register_template(make_template(
      "pgdg-ner-entities", PromptFamily::PgdgNerEntities,
      "Generate {count} different {entity_type_plural} in the {domain} domain.",
      "{entity_type_cap}: {entities}", "{entity_type_cap}:"));

  catalog.register_template(make_template(
      "pgdg-aste-1", PromptFamily::PgdgAsteIndexed,
      "Generate {count} different sentiment, target and opinion triplets.",
      "Target{index}: {target}; Opinion{index}: {opinion}; Sentiment{index}: {sentiment};",
      "Target0:"));

  catalog.register_template(make_template(
      "pgdg-aste-2", PromptFamily::PgdgAsteParallel,
      "Generate {count} different sentiment, target and opinion triplets.",
      "Target: {target} Opinion: {opinion} Sentiment: {sentiment}", "Target:"));

  catalog.register_template(make_template(
      "pgdg-aste-3", PromptFamily::PgdgAsteSentimentConditioned,
      "Generate {count} different targets and opinions in {sentiment} sentiment.",
      "Sentiment: {sentiment}; Target: {target}; Opinion: {opinion};",
      "Sentiment: {sentiment}; Target:"));

  catalog.register_template(make_template(
      "gen-sentence-fewrel", PromptFamily::SentenceGenRelation,
      "Generate a sentence with the given entities and relation.",
      "Relation: {relation}\nHead Entity: {head}; Tail Entity: {tail}\nText: {text}",
      "Relation: {relation}\nHead Entity: {head}; Tail Entity: {tail}\nText:"));

  catalog.register_template(make_template(
      "gen-sentence-ner", PromptFamily::SentenceGenNer,
      "Generate text with all the given entities in the {domain} domain.",
      "Entities: {entities}\nText: {text}", "Entities: {entities}\nText:"));

  catalog.register_template(make_template(
      "gen-sentence-aste", PromptFamily::SentenceGenAste,
      "Generate a sentence with the given target, opinion and sentiment triplets in the {domain} "
      "domain.",
      "Target{index}: {target}; Opinion{index}: {opinion}; Sentiment{index}: {sentiment};",
      "Text:"));

  catalog.register_template(make_template(
      "ner-type-pass", PromptFamily::NerTypePass, "",
      "Text: {text}\n{entity_type_cap} entity: {entities}",
      "Text: {text}\n{entity_type_cap} entity:"));

  catalog.register_template(make_template(
      "ner-disambiguation", PromptFamily::NerDisambiguation,
      "Choose the right entity type from the candidate list for the given entity in the text "
      "context.",
      "Text: {text}\nEntity: {entity}\nCandidate List: {candidates}\nEntity Type: {entity_type}",
      "Text: {text}\nEntity: {entity}\nCandidate List: {candidates}\nEntity Type:"));

  catalog.register_template(make_template(
      "ner-type-definition", PromptFamily::NerTypeDefinition,
      "Generate the definition of the entity type '{entity_type}' in the {domain} domain.", "",
      "{entity_type_cap}:"));

  return catalog;
}

void TemplateCatalog::register_template(PromptTemplate t) {
  if (t.template_id.empty()) {
    throw PromptError(PromptErrorKind::BadTemplate, "template id must be non-empty");
  }
  if (t.join_separator.empty()) t.join_separator = "\n";
  validate_placeholders(t);
  templates_[t.template_id] = std::move(t);
}

void TemplateCatalog::load_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json doc = json::parse(buffer.str());
    PromptTemplate t;
    t.template_id = doc.at("template_id").get<std::string>();
    auto family = prompt_family_from_string(doc.at("family").get<std::string>());
    if (!family) {
      throw PromptError(PromptErrorKind::BadTemplate,
                        "unknown family in template file " + path.string());
    }
    t.family = *family;
    t.instruction = doc.value("instruction", "");
    t.example_block_format = doc.value("example_block_format", "");
    t.query_block_format = doc.value("query_block_format", "");
    t.join_separator = doc.value("join_separator", "\n");
    t.mark_entities_in_text = doc.value("mark_entities_in_text", false);
    register_template(std::move(t));
  }
}

const PromptTemplate* TemplateCatalog::find(const std::string& id) const {
  auto it = templates_.find(id);
  return it == templates_.end() ? nullptr : &it->second;
}

const PromptTemplate& TemplateCatalog::require(const std::string& id) const {
  const PromptTemplate* t = find(id);
  if (!t) throw PromptError(PromptErrorKind::UnknownVariant, "unknown template id: " + id);
  return *t;
}

std::vector<std::string> TemplateCatalog::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

// Layout convention, frozen by the golden files: one newline between lines
// within a block, a blank line between a leading instruction block and the
// shots, single newlines otherwise. Zero-shot prompts collapse to
// instruction + query.
std::string assemble(const std::string& instruction_block,
                     const std::vector<std::string>& shot_blocks, const std::string& query_block,
                     const std::string& join_sep) {
  std::string out;
  if (!instruction_block.empty()) {
    out += instruction_block;
    out += shot_blocks.empty() ? "\n" : "\n\n";
  }
  for (const auto& block : shot_blocks) {
    out += block;
    out += join_sep;
  }
  out += query_block;
  return out;
}

std::string last_line(const std::string& text) {
  auto pos = text.rfind('\n');
  return pos == std::string::npos ? text : text.substr(pos + 1);
}

RenderedPrompt finish(const PromptTemplate& t, std::string text, std::size_t shots,
                      std::vector<std::string> stops) {
  RenderedPrompt p;
  p.text = std::move(text);
  p.template_id = t.template_id;
  p.shot_count = static_cast<int>(shots);
  p.stop_sequences = std::move(stops);
  p.answer_prefix = last_line(p.text);
  return p;
}

std::string mark_entity(const std::string& sentence, const std::string& surface,
                        const std::string& role_marker) {
  auto pos = sentence.find(surface);
  if (pos == std::string::npos) {
    throw PromptError(PromptErrorKind::MissingField,
                      "entity '" + surface + "' not present in sentence");
  }
  std::string marked = sentence;
  marked.replace(pos, surface.size(), "[" + surface + " " + role_marker + "]");
  return marked;
}

std::string relation_enumeration(const LabelSpace& space) {
  std::string out = "Relation: ";
  for (std::size_t i = 0; i < space.labels.size(); ++i) {
    if (i > 0) out += "; ";
    out += space.labels[i];
  }
  out += ";";
  return out;
}

std::string shot_text(const FewShotExample& shot) {
  const std::string& t = shot.annotation.text();
  return t.empty() ? shot.input_text : t;
}

std::string entity_list_with_semicolons(const std::vector<std::string>& entities) {
  if (entities.empty()) return "None";
  return join(entities, "; ") + ";";
}

// Builds the instruction, dropping the literal " in the {domain} domain"
// clause when the task has no domain hint.
std::string domain_instruction(const std::string& format, const std::string& domain,
                               std::map<std::string, std::string> values) {
  std::string fmt = format;
  if (domain.empty()) {
    fmt = replace_all(fmt, " in the {domain} domain", "");
  } else {
    values["domain"] = domain;
  }
  return render_format(fmt, values);
}

std::vector<SurfaceTriplet> surface_triplets(const AsteInstance& inst) {
  std::vector<SurfaceTriplet> out;
  out.reserve(inst.triplets.size());
  for (const auto& t : inst.triplets) {
    out.push_back({t.target_surface, t.opinion_surface, t.sentiment});
  }
  return out;
}

std::string aste_clause_lines(const PromptTemplate& t, const std::vector<SurfaceTriplet>& triplets,
                              const std::string& sep) {
  std::vector<std::string> clauses;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    clauses.push_back(render_format(t.example_block_format,
                                    {{"index", std::to_string(i)},
                                     {"target", triplets[i].target},
                                     {"opinion", triplets[i].opinion},
                                     {"sentiment", to_string(triplets[i].sentiment)}}));
  }
  return join(clauses, sep);
}

std::string aste_parallel_block(const PromptTemplate& t,
                                const std::vector<SurfaceTriplet>& triplets) {
  std::vector<std::string> targets, opinions, sentiments;
  for (const auto& tr : triplets) {
    targets.push_back(tr.target);
    opinions.push_back(tr.opinion);
    sentiments.push_back(to_string(tr.sentiment));
  }
  auto listify = [](const std::vector<std::string>& items) { return join(items, "; ") + ";"; };
  return render_format(t.example_block_format, {{"target", listify(targets)},
                                                {"opinion", listify(opinions)},
                                                {"sentiment", listify(sentiments)}});
}

std::string typed_entity_list(const std::vector<std::pair<std::string, std::string>>& entities) {
  std::vector<std::string> items;
  for (const auto& [type, surface] : entities) items.push_back(type + ": " + surface + ";");
  return join(items, " ");
}

}  // namespace

ExampleBlock format_example(const TemplateCatalog& catalog, const TaskSpec& spec,
                            const std::string& variant, const FewShotExample& shot) {
  const PromptTemplate& t = catalog.require(variant);
  const std::string text = shot_text(shot);
  ExampleBlock out;

  switch (t.family) {
    case PromptFamily::PgdaClassification: {
      const auto* c = std::get_if<ClassificationInstance>(&shot.annotation.payload);
      if (!c) throw PromptError(PromptErrorKind::MissingField, "shot is not a classification");
      out.block = render_format(t.example_block_format, {{"text", text}, {"label", c->label}});
      std::string query = render_format(t.query_block_format, {{"text", text}});
      if (!starts_with(out.block, query)) {
        throw PromptError(PromptErrorKind::BadTemplate,
                          "example block does not extend the query block: " + t.template_id);
      }
      out.answer = out.block.substr(query.size());
      break;
    }
    case PromptFamily::PgdaRelation:
    case PromptFamily::PgdaRelationWithDefs: {
      const auto* r = std::get_if<RelationInstance>(&shot.annotation.payload);
      if (!r) throw PromptError(PromptErrorKind::MissingField, "shot is not a relation instance");
      std::string sentence = text;
      if (t.mark_entities_in_text) {
        sentence = mark_entity(sentence, r->head.surface, "HEAD ENTITY");
        sentence = mark_entity(sentence, r->tail.surface, "TAIL ENTITY");
      }
      std::map<std::string, std::string> values = {{"text", sentence},
                                                   {"head", r->head.surface},
                                                   {"tail", r->tail.surface},
                                                   {"relation", r->relation}};
      out.block = render_format(t.example_block_format, values);
      values.erase("relation");
      std::string query = render_format(t.query_block_format, values);
      if (!starts_with(out.block, query)) {
        throw PromptError(PromptErrorKind::BadTemplate,
                          "example block does not extend the query block: " + t.template_id);
      }
      out.answer = out.block.substr(query.size());
      break;
    }
    case PromptFamily::PgdaAsteIndexed:
    case PromptFamily::PgdaAsteParallel: {
      const auto* a = std::get_if<AsteInstance>(&shot.annotation.payload);
      if (!a) throw PromptError(PromptErrorKind::MissingField, "shot is not an ASTE instance");
      if (a->triplets.empty()) {
        throw PromptError(PromptErrorKind::EmptySpans, "ASTE shot has no triplets");
      }
      auto triplets = surface_triplets(*a);
      std::string body = t.family == PromptFamily::PgdaAsteParallel
                             ? aste_parallel_block(t, triplets)
                             : aste_clause_lines(t, triplets, "\n");
      out.block = "Text: " + text + "\n" + body;
      std::string query = "Text: " + text + "\n" + t.query_block_format;
      if (!starts_with(out.block, query)) {
        throw PromptError(PromptErrorKind::BadTemplate,
                          "example block does not extend the query block: " + t.template_id);
      }
      out.answer = out.block.substr(query.size());
      break;
    }
    default:
      throw PromptError(PromptErrorKind::UnknownVariant,
                        "template " + t.template_id + " has no example-block form");
  }
  return out;
}

RenderedPrompt render_pgda(const TemplateCatalog& catalog, const TaskSpec& spec,
                           const std::string& variant, const PgdaQuery& query) {
  const PromptTemplate& t = catalog.require(variant);
  if (query.text.empty()) {
    throw PromptError(PromptErrorKind::MissingField, "query text is empty");
  }

  bool kind_ok = false;
  switch (spec.kind) {
    case TaskKind::Classification: kind_ok = t.family == PromptFamily::PgdaClassification; break;
    case TaskKind::RelationExtraction:
      kind_ok = t.family == PromptFamily::PgdaRelation ||
                t.family == PromptFamily::PgdaRelationWithDefs;
      break;
    case TaskKind::Aste:
      kind_ok = t.family == PromptFamily::PgdaAsteIndexed ||
                t.family == PromptFamily::PgdaAsteParallel;
      break;
    case TaskKind::Ner: kind_ok = false; break;
  }
  if (!kind_ok) {
    throw PromptError(PromptErrorKind::UnknownVariant,
                      "template " + variant + " is not registered for this task kind");
  }

  std::string instruction_block = t.instruction;
  if (t.family == PromptFamily::PgdaRelation) {
    instruction_block += "\n" + relation_enumeration(spec.label_space);
  } else if (t.family == PromptFamily::PgdaRelationWithDefs) {
    std::vector<std::string> defs;
    for (const auto& label : spec.label_space.labels) {
      if (const std::string* d = spec.label_space.definition_of(label)) {
        defs.push_back("Relation: " + label + "\nRelation Definition: " + *d);
      }
    }
    instruction_block = join(defs, "\n") + (defs.empty() ? "" : "\n") + t.instruction;
  }

  std::vector<std::string> shot_blocks;
  for (const auto& shot : spec.shots) {
    shot_blocks.push_back(format_example(catalog, spec, variant, shot).block);
  }

  std::string query_block;
  std::vector<std::string> stops;
  switch (t.family) {
    case PromptFamily::PgdaClassification:
      query_block = render_format(t.query_block_format, {{"text", query.text}});
      stops = {"\n"};
      break;
    case PromptFamily::PgdaRelation:
    case PromptFamily::PgdaRelationWithDefs: {
      if (query.head.empty() || query.tail.empty()) {
        throw PromptError(PromptErrorKind::MissingField,
                          "relation query requires head and tail surfaces");
      }
      std::string sentence = query.text;
      if (t.mark_entities_in_text) {
        sentence = mark_entity(sentence, query.head, "HEAD ENTITY");
        sentence = mark_entity(sentence, query.tail, "TAIL ENTITY");
      }
      query_block = render_format(
          t.query_block_format,
          {{"text", sentence}, {"head", query.head}, {"tail", query.tail}});
      stops = {"\n"};
      break;
    }
    case PromptFamily::PgdaAsteIndexed:
    case PromptFamily::PgdaAsteParallel:
      query_block = "Text: " + query.text + "\n" + t.query_block_format;
      stops = {"\nText:"};
      break;
    default: break;
  }

  return finish(t, assemble(instruction_block, shot_blocks, query_block, t.join_separator),
                shot_blocks.size(), std::move(stops));
}

RenderedPrompt render_pgdg_span(const TemplateCatalog& catalog, const TaskSpec& spec,
                                const std::string& label, int count, const std::string& variant) {
  if (count < 1) {
    throw PromptError(PromptErrorKind::MissingField, "count must be at least 1");
  }
  std::string id = variant;
  if (id.empty()) {
    switch (spec.kind) {
      case TaskKind::Classification: id = "pgdg-sst2"; break;
      case TaskKind::RelationExtraction: id = "pgdg-fewrel-pairs"; break;
      case TaskKind::Ner: id = "pgdg-ner-entities"; break;
      case TaskKind::Aste: id = "pgdg-aste-1"; break;
    }
  }
  const PromptTemplate& t = catalog.require(id);
  auto canonical = spec.label_space.canonical(label);
  if (!canonical) throw PromptError(PromptErrorKind::UnknownLabel, "unknown label: " + label);
  const std::string count_str = std::to_string(count);

  switch (t.family) {
    case PromptFamily::PgdgClassification: {
      std::string instruction = render_format(
          t.instruction,
          {{"count", count_str}, {"label", *canonical}, {"label_lower", fold_case(*canonical)}});
      std::vector<std::string> shot_blocks;
      for (const auto& shot : spec.shots) {
        const auto* c = std::get_if<ClassificationInstance>(&shot.annotation.payload);
        if (!c || !spec.label_space.canonical(c->label).has_value()) continue;
        if (fold_case(c->label) != fold_case(*canonical)) continue;
        shot_blocks.push_back(render_format(
            t.example_block_format, {{"text", shot_text(shot)}, {"label", *canonical}}));
      }
      std::string query = render_format(t.query_block_format, {{"label", *canonical}});
      return finish(t, assemble(instruction, shot_blocks, query, t.join_separator),
                    shot_blocks.size(), {});
    }
    case PromptFamily::PgdgRelationPairs: {
      std::string instruction = render_format(t.instruction, {{"count", count_str}});
      std::string header = "Relation: " + *canonical;
      if (const std::string* def = spec.label_space.definition_of(*canonical)) {
        header += "\nRelation Definition: " + *def;
      }
      std::vector<std::string> shot_blocks;
      for (const auto& shot : spec.shots) {
        const auto* r = std::get_if<RelationInstance>(&shot.annotation.payload);
        if (!r || fold_case(r->relation) != fold_case(*canonical)) continue;
        shot_blocks.push_back(render_format(t.example_block_format,
                                            {{"relation", *canonical},
                                             {"head", r->head.surface},
                                             {"tail", r->tail.surface}}));
      }
      std::string text = instruction + "\n" + header + (shot_blocks.empty() ? "\n" : "\n\n");
      for (const auto& block : shot_blocks) text += block + t.join_separator;
      text += t.query_block_format;
      return finish(t, std::move(text), shot_blocks.size(), {});
    }
    case PromptFamily::PgdgNerEntities: {
      std::string cap = capitalize_first(*canonical);
      std::string instruction =
          domain_instruction(t.instruction, spec.domain_hint,
                             {{"count", count_str},
                              {"entity_type", *canonical},
                              {"entity_type_plural", pluralize(fold_case(*canonical))}});
      std::vector<std::string> entities;
      for (const auto& shot : spec.shots) {
        const auto* nr = std::get_if<NerInstance>(&shot.annotation.payload);
        if (!nr) continue;
        for (const auto& span : nr->spans) {
          if (fold_case(span.entity_type) != fold_case(*canonical)) continue;
          if (std::find(entities.begin(), entities.end(), span.surface) == entities.end())
            entities.push_back(span.surface);
        }
      }
      std::string text;
      if (const std::string* def = spec.label_space.definition_of(*canonical)) {
        text += render_format(t.example_block_format,
                              {{"entity_type_cap", cap}, {"entities", *def}}) +
                "\n";
      }
      if (!entities.empty()) {
        text += render_format(t.example_block_format,
                              {{"entity_type_cap", cap}, {"entities", join(entities, ", ")}}) +
                "\n";
      }
      text += instruction + "\n";
      text += render_format(t.query_block_format, {{"entity_type_cap", cap}});
      return finish(t, std::move(text), entities.empty() ? 0 : 1, {});
    }
    case PromptFamily::PgdgAsteIndexed:
    case PromptFamily::PgdgAsteParallel: {
      std::string instruction = render_format(t.instruction, {{"count", count_str}});
      std::vector<std::string> shot_blocks;
      std::size_t shot_no = 0;
      for (const auto& shot : spec.shots) {
        const auto* a = std::get_if<AsteInstance>(&shot.annotation.payload);
        if (!a || a->triplets.empty()) continue;
        ++shot_no;
        auto triplets = surface_triplets(*a);
        std::string body = t.family == PromptFamily::PgdgAsteParallel
                               ? aste_parallel_block(t, triplets)
                               : aste_clause_lines(t, triplets, " ");
        shot_blocks.push_back(std::to_string(shot_no) + ". " + body);
      }
      std::string primer = t.family == PromptFamily::PgdgAsteParallel
                               ? std::to_string(shot_no + 1) + ". " + t.query_block_format
                               : t.query_block_format;
      return finish(t, assemble(instruction, shot_blocks, primer, t.join_separator),
                    shot_blocks.size(), {});
    }
    case PromptFamily::PgdgAsteSentimentConditioned: {
      std::string sentiment = fold_case(*canonical);
      std::string instruction =
          render_format(t.instruction, {{"count", count_str}, {"sentiment", sentiment}});
      std::vector<std::string> shot_blocks;
      for (const auto& shot : spec.shots) {
        const auto* a = std::get_if<AsteInstance>(&shot.annotation.payload);
        if (!a) continue;
        for (const auto& tr : a->triplets) {
          if (to_string(tr.sentiment) != sentiment) continue;
          shot_blocks.push_back(render_format(t.example_block_format,
                                              {{"sentiment", sentiment},
                                               {"target", tr.target_surface},
                                               {"opinion", tr.opinion_surface}}));
        }
      }
      std::string primer = render_format(t.query_block_format, {{"sentiment", sentiment}});
      return finish(t, assemble(instruction, shot_blocks, primer, t.join_separator),
                    shot_blocks.size(), {});
    }
    default:
      throw PromptError(PromptErrorKind::UnknownVariant,
                        "template " + id + " is not a span-generation prompt");
  }
}

RenderedPrompt render_sentence_gen(const TemplateCatalog& catalog, const TaskSpec& spec,
                                   const SeedPayload& seed,
                                   const std::vector<SentenceGenShot>& shots,
                                   const std::string& variant) {
  std::string id = variant;
  if (id.empty()) {
    switch (seed.index()) {
      case 0: id = "dadg-sst2"; break;
      case 1: id = "gen-sentence-fewrel"; break;
      case 2: id = "gen-sentence-ner"; break;
      default: id = "gen-sentence-aste"; break;
    }
  }
  const PromptTemplate& t = catalog.require(id);

  auto seed_values = [&](const SeedPayload& payload,
                         bool with_text) -> std::pair<std::string, std::string> {
    // Returns (block without text line, text line prefix) per family.
    switch (t.family) {
      case PromptFamily::SentenceGenRelation: {
        const auto& re = std::get<ReSeed>(payload);
        if (re.head.empty() || re.tail.empty() || re.relation.empty()) {
          throw PromptError(PromptErrorKind::EmptySpans, "relation seed is incomplete");
        }
        std::map<std::string, std::string> values = {
            {"relation", re.relation}, {"head", re.head}, {"tail", re.tail}};
        return {render_format(with_text ? t.example_block_format : t.query_block_format, values),
                ""};
      }
      case PromptFamily::SentenceGenNer: {
        const auto& ner = std::get<NerSeed>(payload);
        if (ner.entities.empty()) {
          throw PromptError(PromptErrorKind::EmptySpans, "NER seed has no entities");
        }
        std::map<std::string, std::string> values = {{"entities", typed_entity_list(ner.entities)}};
        return {render_format(with_text ? t.example_block_format : t.query_block_format, values),
                ""};
      }
      case PromptFamily::SentenceGenAste: {
        const auto& aste = std::get<AsteSeed>(payload);
        if (aste.triplets.empty()) {
          throw PromptError(PromptErrorKind::EmptySpans, "ASTE seed has no triplets");
        }
        std::vector<std::string> clauses;
        for (std::size_t i = 0; i < aste.triplets.size(); ++i) {
          clauses.push_back(render_format(t.example_block_format,
                                          {{"index", std::to_string(i)},
                                           {"target", aste.triplets[i].target},
                                           {"opinion", aste.triplets[i].opinion},
                                           {"sentiment", to_string(aste.triplets[i].sentiment)}}));
        }
        return {join(clauses, " "), ""};
      }
      case PromptFamily::DadgClassification: {
        const auto& cls = std::get<ClsSeed>(payload);
        if (cls.entity.empty()) {
          throw PromptError(PromptErrorKind::EmptySpans, "dictionary seed has no entity");
        }
        auto canonical = spec.label_space.canonical(cls.label);
        if (!canonical) {
          throw PromptError(PromptErrorKind::UnknownLabel, "unknown label: " + cls.label);
        }
        return {render_format(t.query_block_format,
                              {{"entity", cls.entity}, {"label", *canonical}}),
                *canonical};
      }
      default:
        throw PromptError(PromptErrorKind::UnknownVariant,
                          "template " + id + " is not a sentence-generation prompt");
    }
  };

  std::vector<std::string> shot_blocks;
  std::vector<std::string> stops = {"\n"};

  if (t.family == PromptFamily::DadgClassification) {
    const auto& cls = std::get<ClsSeed>(seed);
    auto canonical = spec.label_space.canonical(cls.label);
    if (!canonical) throw PromptError(PromptErrorKind::UnknownLabel, "unknown label: " + cls.label);
    if (cls.entity.empty()) {
      throw PromptError(PromptErrorKind::EmptySpans, "dictionary seed has no entity");
    }
    for (const auto& shot : shots) {
      const auto& shot_cls = std::get<ClsSeed>(shot.seed);
      auto shot_label = spec.label_space.canonical(shot_cls.label);
      if (!shot_label || fold_case(*shot_label) != fold_case(*canonical)) continue;
      shot_blocks.push_back(render_format(t.example_block_format,
                                          {{"label", *shot_label}, {"text", shot.sentence}}));
    }
    std::string instruction = render_format(t.instruction, {{"label_lower", fold_case(*canonical)}});
    std::string query =
        render_format(t.query_block_format, {{"entity", cls.entity}, {"label", *canonical}});
    // Figure layout for this family puts the shots before the instruction.
    std::string text;
    for (const auto& block : shot_blocks) text += block + t.join_separator;
    text += instruction + "\n" + query;
    return finish(t, std::move(text), shot_blocks.size(), std::move(stops));
  }

  for (const auto& shot : shots) {
    auto [block, _] = seed_values(shot.seed, true);
    if (t.family == PromptFamily::SentenceGenAste) {
      shot_blocks.push_back(block + "\nText: " + shot.sentence);
    } else {
      shot_blocks.push_back(replace_all(block, "{text}", shot.sentence));
    }
  }

  std::string instruction = domain_instruction(t.instruction, spec.domain_hint, {});
  auto [query_core, _] = seed_values(seed, false);
  std::string query_block = t.family == PromptFamily::SentenceGenAste
                                ? query_core + "\n" + t.query_block_format
                                : query_core;
  return finish(t, assemble(instruction, shot_blocks, query_block, t.join_separator),
                shot_blocks.size(), std::move(stops));
}

RenderedPrompt render_ner_type_pass(const TemplateCatalog& catalog, const TaskSpec& spec,
                                    const std::string& entity_type, const std::string& definition,
                                    const std::vector<NerTypeShot>& shots,
                                    const std::string& sentence) {
  const PromptTemplate& t = catalog.require("ner-type-pass");
  auto canonical = spec.label_space.canonical(entity_type);
  if (!canonical) {
    throw PromptError(PromptErrorKind::UnknownLabel, "unknown entity type: " + entity_type);
  }
  if (trim(definition).empty()) {
    throw PromptError(PromptErrorKind::MissingField,
                      "entity type definition is required for the type pass");
  }
  std::string cap = capitalize_first(*canonical);
  std::string definition_block = cap + ": " + definition;
  std::vector<std::string> shot_blocks;
  for (const auto& shot : shots) {
    shot_blocks.push_back(render_format(t.example_block_format,
                                        {{"text", shot.sentence},
                                         {"entity_type_cap", cap},
                                         {"entities", entity_list_with_semicolons(shot.entities)}}));
  }
  std::string query = render_format(t.query_block_format,
                                    {{"text", sentence}, {"entity_type_cap", cap}});
  return finish(t, assemble(definition_block, shot_blocks, query, t.join_separator),
                shot_blocks.size(), {"\n"});
}

RenderedPrompt render_disambiguation(const TemplateCatalog& catalog, const std::string& sentence,
                                     const std::string& entity,
                                     const std::vector<std::string>& candidates,
                                     const std::vector<DisambiguationShot>& shots) {
  const PromptTemplate& t = catalog.require("ner-disambiguation");
  if (candidates.size() < 2) {
    throw PromptError(PromptErrorKind::TooFewCandidates,
                      "disambiguation needs at least two candidate types");
  }
  if (sentence.find(entity) == std::string::npos) {
    throw PromptError(PromptErrorKind::EntityNotInSentence,
                      "entity '" + entity + "' does not occur in the sentence");
  }
  std::vector<std::string> shot_blocks;
  for (const auto& shot : shots) {
    shot_blocks.push_back(render_format(t.example_block_format,
                                        {{"text", shot.sentence},
                                         {"entity", shot.entity},
                                         {"candidates", join(shot.candidates, ", ")},
                                         {"entity_type", shot.answer}}));
  }
  std::string query = render_format(
      t.query_block_format,
      {{"text", sentence}, {"entity", entity}, {"candidates", join(candidates, ", ")}});
  return finish(t, assemble(t.instruction, shot_blocks, query, t.join_separator),
                shot_blocks.size(), {"\n"});
}

RenderedPrompt render_type_definition(const TemplateCatalog& catalog, const TaskSpec& spec,
                                      const std::string& entity_type) {
  const PromptTemplate& t = catalog.require("ner-type-definition");
  auto canonical = spec.label_space.canonical(entity_type);
  if (!canonical) {
    throw PromptError(PromptErrorKind::UnknownLabel, "unknown entity type: " + entity_type);
  }
  std::string instruction =
      domain_instruction(t.instruction, spec.domain_hint, {{"entity_type", *canonical}});
  std::string query = render_format(t.query_block_format,
                                    {{"entity_type_cap", capitalize_first(*canonical)}});
  return finish(t, instruction + "\n" + query, 0, {"\n"});
}

RenderedPrompt render_aste_opinion_gen(const TemplateCatalog& catalog, const TaskSpec& spec,
                                       const std::string& aspect, const std::string& variant,
                                       int count, Sentiment sentiment_for_v3) {
  std::string id = variant.empty() ? "pgdg-aste-1" : variant;
  const PromptTemplate& t = catalog.require(id);
  if (trim(aspect).empty()) {
    throw PromptError(PromptErrorKind::EmptySpans, "aspect must be non-empty");
  }
  const std::string count_str = std::to_string(count);

  std::string instruction;
  std::string primer;
  std::vector<std::string> shot_blocks;
  std::size_t shot_no = 0;
  switch (t.family) {
    case PromptFamily::PgdgAsteIndexed:
      instruction = render_format(t.instruction, {{"count", count_str}});
      for (const auto& shot : spec.shots) {
        const auto* a = std::get_if<AsteInstance>(&shot.annotation.payload);
        if (!a || a->triplets.empty()) continue;
        ++shot_no;
        shot_blocks.push_back(std::to_string(shot_no) + ". " +
                              aste_clause_lines(t, surface_triplets(*a), " "));
      }
      primer = "Target0: " + aspect + "; Opinion0:";
      break;
    case PromptFamily::PgdgAsteParallel:
      instruction = render_format(t.instruction, {{"count", count_str}});
      for (const auto& shot : spec.shots) {
        const auto* a = std::get_if<AsteInstance>(&shot.annotation.payload);
        if (!a || a->triplets.empty()) continue;
        ++shot_no;
        shot_blocks.push_back(std::to_string(shot_no) + ". " +
                              aste_parallel_block(t, surface_triplets(*a)));
      }
      primer = std::to_string(shot_no + 1) + ". Target: " + aspect + "; Opinion:";
      break;
    case PromptFamily::PgdgAsteSentimentConditioned: {
      std::string sentiment = to_string(sentiment_for_v3);
      instruction = render_format(t.instruction, {{"count", count_str}, {"sentiment", sentiment}});
      for (const auto& shot : spec.shots) {
        const auto* a = std::get_if<AsteInstance>(&shot.annotation.payload);
        if (!a) continue;
        for (const auto& tr : a->triplets) {
          if (to_string(tr.sentiment) != sentiment) continue;
          shot_blocks.push_back(render_format(t.example_block_format,
                                              {{"sentiment", sentiment},
                                               {"target", tr.target_surface},
                                               {"opinion", tr.opinion_surface}}));
        }
      }
      primer = "Sentiment: " + sentiment + "; Target: " + aspect + "; Opinion:";
      break;
    }
    default:
      throw PromptError(PromptErrorKind::UnknownVariant,
                        "template " + id + " is not an ASTE span-generation prompt");
  }
  return finish(t, assemble(instruction, shot_blocks, primer, t.join_separator),
                shot_blocks.size(), {"\n"});
}

}  // namespace annotis
