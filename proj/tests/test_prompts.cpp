#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "annotis/backend.hpp"
#include "annotis/parsers.hpp"
#include "annotis/prompts.hpp"
#include "annotis/text.hpp"
#include "test_support.hpp"

using namespace annotis;
using namespace annotis::testing;
namespace fs = std::filesystem;

namespace {

const TemplateCatalog& catalog() {
  static TemplateCatalog c = TemplateCatalog::builtin();
  return c;
}

// Golden prompts, one file per template id. Set ANNOTIS_UPDATE_GOLDENS=1 to
// regenerate after an intentional wording change.
void check_golden(const std::string& name, const std::string& rendered) {
  fs::path path = fs::path(test_data_dir()) / "goldens" / (name + ".txt");
  if (std::getenv("ANNOTIS_UPDATE_GOLDENS")) {
    write_file(path, rendered);
    return;
  }
  INFO("golden file ", path.string());
  REQUIRE_MESSAGE(fs::exists(path), "missing golden; run with ANNOTIS_UPDATE_GOLDENS=1");
  std::string expected = read_file(path);
  CHECK(rendered == expected);
}

TaskSpec fewrel_golden_spec() {
  auto spec = fewrel_spec();
  return spec;
}

PgdaQuery fewrel_golden_query() {
  PgdaQuery query;
  query.text =
      "In 1689 , Konstanty was one of the judges who sentenced Kazimierz Łyszczyński to death "
      "for atheism .";
  query.head = "Kazimierz Łyszczyński";
  query.tail = "atheism";
  return query;
}

TaskSpec pairs_golden_spec() {
  TaskSpec spec;
  spec.kind = TaskKind::RelationExtraction;
  spec.label_space.labels = fewrel_relations();
  spec.label_space.definitions["head of government"] =
      "head of the executive power of this town, city, municipality, state, country, or other "
      "governmental body";
  spec.shots.push_back(relation_shot(
      "Chester Alan Arthur , 21st President of the United States , died of this disease , "
      "November 18 , 1886",
      "United States", "Chester Alan Arthur", "head of government"));
  return spec;
}

}  // namespace

TEST_CASE("sst2 tagging prompt matches the documented answer format") {
  TaskSpec spec = sst2_spec(false);
  FewShotExample shot;
  shot.input_text = "a feast for the eyes";
  shot.annotation.payload = ClassificationInstance{"a feast for the eyes", "Positive"};
  spec.shots = {shot};

  auto prompt = render_pgda(catalog(), spec, "pgda-sst2", {"boring and obvious", "", ""});
  CHECK(prompt.text.find("Choose the sentiment of the given text from Positive and Negative.") !=
        std::string::npos);
  CHECK(prompt.text.find("Text: a feast for the eyes\nSentiment: Positive") != std::string::npos);
  CHECK(ends_with(prompt.text, "Text: boring and obvious\nSentiment:"));
  CHECK(prompt.shot_count == 1);
  CHECK(prompt.answer_prefix == "Sentiment:");

  auto zero_shot = render_pgda(catalog(), sst2_spec(false), "pgda-sst2", {"plain text", "", ""});
  CHECK(zero_shot.text ==
        "Choose the sentiment of the given text from Positive and Negative.\n"
        "Text: plain text\nSentiment:");
}

TEST_CASE("relation enumeration lists every relation exactly once") {
  auto spec = fewrel_golden_spec();
  auto prompt = render_pgda(catalog(), spec, "pgda-fewrel-1", fewrel_golden_query());
  CHECK(spec.label_space.labels.size() == 64);
  for (const auto& relation : spec.label_space.labels) {
    std::size_t first = prompt.text.find(relation + ";");
    bool found_with_terminator =
        first != std::string::npos || prompt.text.find("; " + relation) != std::string::npos;
    CHECK_MESSAGE(found_with_terminator, "relation missing: ", relation);
  }
  // Enumeration is semicolon-joined on one line.
  auto line_start = prompt.text.find("Relation: place served by transport hub;");
  REQUIRE(line_start != std::string::npos);
  auto line_end = prompt.text.find('\n', line_start);
  std::string enumeration = prompt.text.substr(line_start, line_end - line_start);
  std::size_t semicolons = 0;
  for (char c : enumeration) semicolons += c == ';';
  CHECK(semicolons == 64);
}

TEST_CASE("fewrel variants render their distinct answer slots") {
  auto spec = fewrel_golden_spec();
  auto query = fewrel_golden_query();

  auto v1 = render_pgda(catalog(), spec, "pgda-fewrel-1", query);
  CHECK(ends_with(v1.text, "Head Entity: Kazimierz Łyszczyński; Tail Entity: atheism\nRelation:"));
  CHECK(v1.text.find("Head Entity: Mount Korbu; Tail Entity: Titiwangsa Mountains\n"
                     "Relation: mountain range") != std::string::npos);

  auto v2 = render_pgda(catalog(), spec, "pgda-fewrel-2", query);
  CHECK(v2.text.find("the relation between Mount Korbu and Titiwangsa Mountains is "
                     "mountain range") != std::string::npos);
  CHECK(ends_with(v2.text, "the relation between Kazimierz Łyszczyński and atheism is"));

  auto v3 = render_pgda(catalog(), spec, "pgda-fewrel-3", query);
  CHECK(v3.text.find("[Mount Korbu HEAD ENTITY]") != std::string::npos);
  CHECK(v3.text.find("[Titiwangsa Mountains TAIL ENTITY]") != std::string::npos);
  CHECK(v3.text.find("[Kazimierz Łyszczyński HEAD ENTITY]") != std::string::npos);
  CHECK(ends_with(v3.text, "Relation:"));

  auto v4 = render_pgda(catalog(), spec, "pgda-fewrel-4", query);
  CHECK(v4.text.find("<head> Mount Korbu <tail> Titiwangsa Mountains <relation> mountain range") !=
        std::string::npos);
  CHECK(ends_with(v4.text, "<head> Kazimierz Łyszczyński <tail> atheism <relation>:"));

  auto v5 = render_pgda(catalog(), spec, "pgda-fewrel-5", query);
  CHECK(v5.text.find("Relation: head of government\nRelation Definition: head of the executive "
                     "power") != std::string::npos);
  CHECK(v5.text.find("Relation: place served by transport hub\nRelation Definition: territorial "
                     "entity or entities served by this transport hub") != std::string::npos);
  CHECK(ends_with(v5.text, "Relation:"));
}

TEST_CASE("aste tagging prompts for the three grammars") {
  auto spec = aste_spec();
  PgdaQuery query{"[Unlabeled Data]", "", ""};

  auto v1 = render_pgda(catalog(), spec, "pgda-aste-1", query);
  CHECK(v1.text.find("Identify the target, opinion, and sentiment triplets in the given text.") !=
        std::string::npos);
  CHECK(v1.text.find("Text: The biggest problem is that the box had no instructions in it .\n"
                     "Target0: instructions; Opinion0: problem; Sentiment0: negative\n"
                     "Target1: instructions; Opinion1: no; Sentiment1: negative") !=
        std::string::npos);
  CHECK(ends_with(v1.text, "Text: [Unlabeled Data]\nTarget0:"));

  auto v2 = render_pgda(catalog(), spec, "pgda-aste-2", query);
  CHECK(v2.text.find("Target: instructions; instructions;\nOpinion: problem; no;\n"
                     "Sentiment: negative; negative;") != std::string::npos);
  CHECK(ends_with(v2.text, "Text: [Unlabeled Data]\nTarget:"));

  auto v3 = render_pgda(catalog(), spec, "pgda-aste-3", query);
  CHECK(v3.text.find("Target0: is instructions. Its opinion span is problem. Its sentiment is "
                     "negative.") != std::string::npos);
  CHECK(ends_with(v3.text, "Text: [Unlabeled Data]\nTarget0: is"));
}

TEST_CASE("span generation prompts embed count, label and definitions") {
  auto pairs = render_pgdg_span(catalog(), pairs_golden_spec(), "head of government", 20);
  CHECK(starts_with(pairs.text,
                    "Generate 20 different Head Entity and Tail Entity with the given Relation."));
  CHECK(pairs.text.find("Relation Definition: head of the executive power of this town, city, "
                        "municipality, state, country, or other governmental body") !=
        std::string::npos);
  CHECK(pairs.text.find("Head Entity: United States; Tail Entity: Chester Alan Arthur") !=
        std::string::npos);
  CHECK(ends_with(pairs.text, "Head Entity:"));

  auto entities = render_pgdg_span(catalog(), crossner_spec(), "researcher", 15);
  CHECK(entities.text.find("Generate 15 different researchers in the AI domain.") !=
        std::string::npos);
  CHECK(entities.text.find("Researcher: A researcher in AI domain") != std::string::npos);
  CHECK(entities.text.find("Researcher: Marvin Minsky, Seymour Papert") != std::string::npos);
  CHECK(ends_with(entities.text, "Researcher:"));

  auto single = render_pgdg_span(catalog(), crossner_spec(false), "conference", 1);
  CHECK(single.text.find("Generate 1 different conferences in the AI domain.") !=
        std::string::npos);

  auto reviews = render_pgdg_span(catalog(), sst2_spec(), "Positive", 20);
  CHECK(starts_with(reviews.text,
                    "Write 20 different movie reviews with positive sentiments with no more than "
                    "20 words."));
  CHECK(reviews.text.find("Sentiment: Positive\nText: a feast for the eyes") != std::string::npos);
  CHECK(ends_with(reviews.text, "Sentiment: Positive\nText:"));
  // Shots of the other label stay out.
  CHECK(reviews.text.find("boring and obvious") == std::string::npos);

  CHECK_THROWS_AS(render_pgdg_span(catalog(), sst2_spec(), "Neutralish", 20), PromptError);
}

TEST_CASE("sentence generation prompts for every seed family") {
  auto spec = pairs_golden_spec();
  auto shots = sentence_shots_from(spec);
  ReSeed seed{"Entity1", "Entity2", "head of government"};
  auto re = render_sentence_gen(catalog(), spec, seed, shots);
  CHECK(starts_with(re.text, "Generate a sentence with the given entities and relation."));
  CHECK(re.text.find("Relation: head of government\nHead Entity: United States; Tail Entity: "
                     "Chester Alan Arthur\nText: Chester Alan Arthur , 21st President of the "
                     "United States , died of this disease , November 18 , 1886") !=
        std::string::npos);
  CHECK(ends_with(re.text,
                  "Relation: head of government\nHead Entity: Entity1; Tail Entity: Entity2\n"
                  "Text:"));

  NerSeed ner_seed{{{"researcher", "David Silver"}, {"university", "MIT"}}};
  auto ner = render_sentence_gen(catalog(), crossner_spec(false), ner_seed, {});
  CHECK(ner.text ==
        "Generate text with all the given entities in the AI domain.\n"
        "Entities: researcher: David Silver; university: MIT;\nText:");

  AsteSeed aste_seed{{{"port layout", "good", Sentiment::Positive}}};
  auto aste = render_sentence_gen(catalog(), aste_spec(), aste_seed, sentence_shots_from(aste_spec()));
  CHECK(starts_with(aste.text, "Generate a sentence with the given target, opinion and sentiment "
                               "triplets in the laptop domain."));
  CHECK(aste.text.find("Target0: instructions; Opinion0: problem; Sentiment0: negative; "
                       "Target1: instructions; Opinion1: no; Sentiment1: negative;\n"
                       "Text: The biggest problem is that the box had no instructions in it .") !=
        std::string::npos);
  CHECK(ends_with(aste.text, "Target0: port layout; Opinion0: good; Sentiment0: positive;\nText:"));

  ClsSeed cls_seed{"Positive", "[Entity1]"};
  auto dadg = render_sentence_gen(catalog(), sst2_spec(), cls_seed, sentence_shots_from(sst2_spec()));
  CHECK(dadg.text.find("Sentiment: Positive\nText: a feast for the eyes") != std::string::npos);
  CHECK(dadg.text.find("Write a movie review with the given entity with positive sentiment.") !=
        std::string::npos);
  CHECK(ends_with(dadg.text, "Entity: [Entity1]\nSentiment: Positive\nText:"));

  CHECK_THROWS_AS(render_sentence_gen(catalog(), crossner_spec(false), NerSeed{}, {}),
                  PromptError);
}

TEST_CASE("ner type pass and disambiguation prompts") {
  auto spec = crossner_spec();
  std::vector<NerTypeShot> shots = type_shots_for(spec, "researcher");
  REQUIRE(shots.size() == 1);
  auto pass = render_ner_type_pass(catalog(), spec, "researcher",
                                   *spec.label_space.definition_of("researcher"), shots,
                                   "[Unlabeled Data]");
  CHECK(starts_with(pass.text, "Researcher: A researcher in AI domain"));
  CHECK(pass.text.find("Researcher entity: Marvin Minsky; Seymour Papert;") != std::string::npos);
  CHECK(ends_with(pass.text, "Text: [Unlabeled Data]\nResearcher entity:"));

  CHECK_THROWS_AS(
      render_ner_type_pass(catalog(), spec, "researcher", "  ", shots, "x"),
      PromptError);

  const std::string sentence =
      "Advocates of procedural representations were mainly centered at MIT , under the "
      "leadership of Marvin Minsky and Seymour Papert .";
  std::vector<std::string> candidates = {"product", "task",   "researcher",
                                         "university", "organisation", "person"};
  DisambiguationShot shot{sentence, "Marvin Minsky", candidates, "researcher"};
  auto disamb = render_disambiguation(catalog(), sentence, "Seymour Papert", candidates, {shot});
  CHECK(starts_with(disamb.text, "Choose the right entity type from the candidate list for the "
                                 "given entity in the text context."));
  CHECK(disamb.text.find("Candidate List: product, task, researcher, university, organisation, "
                         "person") != std::string::npos);
  CHECK(disamb.text.find("Entity Type: researcher") != std::string::npos);
  CHECK(ends_with(disamb.text, "Entity Type:"));

  CHECK_THROWS_AS(render_disambiguation(catalog(), sentence, "Seymour Papert", {"researcher"}, {}),
                  PromptError);
  CHECK_THROWS_AS(render_disambiguation(catalog(), "no such entity here", "Marvin Minsky",
                                        candidates, {}),
                  PromptError);

  auto definition = render_type_definition(catalog(), spec, "researcher");
  CHECK(definition.text ==
        "Generate the definition of the entity type 'researcher' in the AI domain.\nResearcher:");
}

TEST_CASE("aste opinion generation primes the aspect") {
  auto spec = aste_spec();
  auto v1 = render_aste_opinion_gen(catalog(), spec, "battery life", "pgdg-aste-1", 20);
  CHECK(ends_with(v1.text, "Target0: battery life; Opinion0:"));
  auto v3 = render_aste_opinion_gen(catalog(), spec, "battery life", "pgdg-aste-3", 20,
                                    Sentiment::Negative);
  CHECK(v3.text.find("Generate 20 different targets and opinions in negative sentiment.") !=
        std::string::npos);
  CHECK(ends_with(v3.text, "Sentiment: negative; Target: battery life; Opinion:"));
}

TEST_CASE("rendering is deterministic and monotone in shots") {
  auto spec = sst2_spec();
  auto a = render_pgda(catalog(), spec, "pgda-sst2", {"query text", "", ""});
  auto b = render_pgda(catalog(), spec, "pgda-sst2", {"query text", "", ""});
  CHECK(a.text == b.text);

  // Shots appear in list order and adding one strictly grows the prompt.
  auto spec_small = sst2_spec(false);
  spec_small.shots = {spec.shots[0]};
  auto one_shot = render_pgda(catalog(), spec_small, "pgda-sst2", {"query text", "", ""});
  spec_small.shots.push_back(spec.shots[1]);
  auto two_shot = render_pgda(catalog(), spec_small, "pgda-sst2", {"query text", "", ""});
  CHECK(two_shot.text.size() > one_shot.text.size());
  CHECK(estimate_tokens(two_shot.text) >= estimate_tokens(one_shot.text));
  auto feast = two_shot.text.find("a feast for the eyes");
  auto boring = two_shot.text.find("boring and obvious");
  REQUIRE(feast != std::string::npos);
  REQUIRE(boring != std::string::npos);
  CHECK(feast < boring);
}

TEST_CASE("template catalog loads user templates from a directory") {
  TempDir dir("templates");
  write_file(dir.path() / "my-sst2.json", R"({
    "template_id": "my-sst2",
    "family": "pgda_classification",
    "instruction": "Pick the label.",
    "example_block_format": "Input: {text}\nLabel: {label}",
    "query_block_format": "Input: {text}\nLabel:"
  })");
  TemplateCatalog local = TemplateCatalog::builtin();
  local.load_directory(dir.str());
  auto prompt = render_pgda(local, sst2_spec(false), "my-sst2", {"hello", "", ""});
  CHECK(prompt.text == "Pick the label.\nInput: hello\nLabel:");

  write_file(dir.path() / "bad.json", R"({
    "template_id": "bad",
    "family": "pgda_classification",
    "instruction": "x",
    "example_block_format": "{unknown_placeholder}",
    "query_block_format": "y"
  })");
  CHECK_THROWS_AS(local.load_directory(dir.str()), PromptError);

  CHECK_THROWS_AS(render_pgda(catalog(), sst2_spec(false), "no-such-id", {"x", "", ""}),
                  PromptError);
  // A NER task has no direct tagging template.
  CHECK_THROWS_AS(render_pgda(catalog(), crossner_spec(false), "pgda-sst2", {"x", "", ""}),
                  PromptError);
}

// ---------------------------------------------------------------------------
// format -> parse round trip

TEST_CASE("classification example blocks parse back to the shot label") {
  auto spec = sst2_spec(false);
  Rng rng(41);
  for (int i = 0; i < 250; ++i) {
    FewShotExample shot;
    shot.annotation = random_classification(rng, spec);
    shot.input_text = shot.annotation.text();
    auto block = format_example(catalog(), spec, "pgda-sst2", shot);
    auto parsed = parse_label(block.answer, spec.label_space);
    REQUIRE(parsed.ok());
    CHECK(parsed.value() == std::get<ClassificationInstance>(shot.annotation.payload).label);
  }
}

TEST_CASE("relation example blocks parse back across every variant") {
  auto spec = fewrel_spec(false);
  const char* variants[] = {"pgda-fewrel-1", "pgda-fewrel-2", "pgda-fewrel-4", "pgda-fewrel-5"};
  Rng rng(42);
  for (int i = 0; i < 250; ++i) {
    FewShotExample shot;
    shot.annotation = random_relation(rng, spec);
    shot.input_text = shot.annotation.text();
    for (const char* variant : variants) {
      auto block = format_example(catalog(), spec, variant, shot);
      auto parsed = parse_label(block.answer, spec.label_space);
      REQUIRE_MESSAGE(parsed.ok(), "variant ", variant, " answer: ", block.answer);
      CHECK(parsed.value() == std::get<RelationInstance>(shot.annotation.payload).relation);
    }
  }
}

TEST_CASE("aste example blocks parse back for all three grammars") {
  auto spec = aste_spec(false);
  Rng rng(43);
  for (int i = 0; i < 250; ++i) {
    FewShotExample shot;
    shot.annotation = random_aste(rng);
    shot.input_text = shot.annotation.text();
    const auto& inst = std::get<AsteInstance>(shot.annotation.payload);
    for (int variant = 1; variant <= 3; ++variant) {
      std::string id = "pgda-aste-" + std::to_string(variant);
      auto block = format_example(catalog(), spec, id, shot);
      auto parsed = parse_aste(block.answer, variant);
      REQUIRE_MESSAGE(parsed.ok(), "variant ", variant, " answer: ", block.answer);
      REQUIRE(parsed.value().size() == inst.triplets.size());
      for (std::size_t k = 0; k < inst.triplets.size(); ++k) {
        CHECK(parsed.value()[k].target == inst.triplets[k].target_surface);
        CHECK(parsed.value()[k].opinion == inst.triplets[k].opinion_surface);
        CHECK(parsed.value()[k].sentiment == inst.triplets[k].sentiment);
      }
    }
  }
}

TEST_CASE("ner type pass answers parse back to the entity surfaces") {
  auto spec = crossner_spec(false);
  Rng rng(44);
  for (int i = 0; i < 250; ++i) {
    auto inst = random_ner(rng, spec);
    const auto& ner = std::get<NerInstance>(inst.payload);
    for (const auto& type : spec.label_space.labels) {
      std::vector<std::string> expected;
      for (const auto& span : ner.spans) {
        if (span.entity_type == type) expected.push_back(span.surface);
      }
      if (expected.empty()) continue;
      // The per-type answer line is the semicolon list the prompt teaches.
      std::string answer = join(expected, "; ") + ";";
      CHECK(parse_entity_list(answer) == expected);
    }
  }
}

// ---------------------------------------------------------------------------
// Golden files for every built-in template

TEST_CASE("golden prompts") {
  // SST2 family.
  check_golden("pgda-sst2",
               render_pgda(catalog(), sst2_spec(), "pgda-sst2", {"[Unlabeled Data]", "", ""}).text);
  check_golden("pgdg-sst2", render_pgdg_span(catalog(), sst2_spec(), "Positive", 20).text);
  check_golden("dadg-sst2",
               render_sentence_gen(catalog(), sst2_spec(), ClsSeed{"Positive", "[Entity1]"},
                                   sentence_shots_from(sst2_spec()))
                   .text);

  // FewRel family.
  auto spec = fewrel_golden_spec();
  auto query = fewrel_golden_query();
  for (int v = 1; v <= 5; ++v) {
    std::string id = "pgda-fewrel-" + std::to_string(v);
    check_golden(id, render_pgda(catalog(), spec, id, query).text);
  }
  check_golden("pgdg-fewrel-pairs",
               render_pgdg_span(catalog(), pairs_golden_spec(), "head of government", 20).text);
  check_golden("gen-sentence-fewrel",
               render_sentence_gen(catalog(), pairs_golden_spec(),
                                   ReSeed{"Entity1", "Entity2", "head of government"},
                                   sentence_shots_from(pairs_golden_spec()))
                   .text);

  // CrossNER family.
  check_golden("pgdg-ner-entities",
               render_pgdg_span(catalog(), crossner_spec(), "researcher", 15).text);
  check_golden("gen-sentence-ner",
               render_sentence_gen(catalog(), crossner_spec(false),
                                   NerSeed{{{"researcher", "David Silver"},
                                            {"university", "MIT"}}},
                                   {})
                   .text);
  check_golden("ner-type-pass",
               render_ner_type_pass(catalog(), crossner_spec(), "researcher",
                                    *crossner_spec().label_space.definition_of("researcher"),
                                    type_shots_for(crossner_spec(), "researcher"),
                                    "[Unlabeled Data]")
                   .text);
  const std::string minsky_sentence =
      "Advocates of procedural representations were mainly centered at MIT , under the "
      "leadership of Marvin Minsky and Seymour Papert .";
  std::vector<std::string> candidates = {"product", "task",        "researcher",
                                         "university", "organisation", "person"};
  check_golden("ner-disambiguation",
               render_disambiguation(catalog(), minsky_sentence, "Seymour Papert", candidates,
                                     {{minsky_sentence, "Marvin Minsky", candidates,
                                       "researcher"}})
                   .text);
  check_golden("ner-type-definition",
               render_type_definition(catalog(), crossner_spec(), "researcher").text);

  // ASTE family.
  for (int v = 1; v <= 3; ++v) {
    std::string id = "pgda-aste-" + std::to_string(v);
    check_golden(id, render_pgda(catalog(), aste_spec(), id, {"[Unlabeled Data]", "", ""}).text);
  }
  check_golden("pgdg-aste-1", render_pgdg_span(catalog(), aste_spec(), "negative", 20,
                                               "pgdg-aste-1")
                                  .text);
  check_golden("pgdg-aste-2", render_pgdg_span(catalog(), aste_spec(), "negative", 20,
                                               "pgdg-aste-2")
                                  .text);
  check_golden("pgdg-aste-3", render_pgdg_span(catalog(), aste_spec(), "negative", 20,
                                               "pgdg-aste-3")
                                  .text);
  check_golden("gen-sentence-aste",
               render_sentence_gen(catalog(), aste_spec(),
                                   AsteSeed{{{"[Target0]", "[Opinion0]", Sentiment::Positive}}},
                                   sentence_shots_from(aste_spec()))
                   .text);
}
