// Writes the parser fixture corpus: one JSON file per fixture with
// {parser, variant, labels, input, expected}. Hand-pinned cases come from the
// documented answer formats; the rest are constructed inputs whose expected
// values are computed with the naive reference parsers. The unit suite then
// checks production == expected == reference for every file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "annotis/rng.hpp"
#include "reference_parsers.hpp"

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

int g_counter = 0;
fs::path g_out_dir;

void write_fixture(ordered_json fixture) {
  char name[32];
  std::snprintf(name, sizeof(name), "fixture_%03d.json", g_counter++);
  std::ofstream out(g_out_dir / name, std::ios::binary);
  out << fixture.dump(2) << "\n";
}

ordered_json label_expected(const refparse::RefLabelResult& r) {
  ordered_json expected;
  expected["ok"] = r.ok;
  if (r.ok) {
    expected["value"] = r.value;
  } else {
    expected["reason"] = r.reason;
  }
  return expected;
}

void label_fixture(const std::vector<std::string>& labels, const std::string& input) {
  ordered_json fixture;
  fixture["parser"] = "label";
  fixture["labels"] = labels;
  fixture["input"] = input;
  fixture["expected"] = label_expected(refparse::ref_parse_label(input, labels));
  write_fixture(std::move(fixture));
}

void label_fixture_pinned(const std::vector<std::string>& labels, const std::string& input,
                          ordered_json expected) {
  auto computed = label_expected(refparse::ref_parse_label(input, labels));
  if (computed != expected) {
    std::fprintf(stderr, "pinned label fixture disagrees with reference for input %s\n",
                 input.c_str());
    std::exit(1);
  }
  ordered_json fixture;
  fixture["parser"] = "label";
  fixture["labels"] = labels;
  fixture["input"] = input;
  fixture["expected"] = std::move(expected);
  write_fixture(std::move(fixture));
}

void entity_list_fixture(const std::string& input) {
  ordered_json fixture;
  fixture["parser"] = "entity_list";
  fixture["input"] = input;
  fixture["expected"] = {{"values", refparse::ref_parse_entity_list(input)}};
  write_fixture(std::move(fixture));
}

void numbered_list_fixture(const std::string& input) {
  ordered_json fixture;
  fixture["parser"] = "numbered_list";
  fixture["input"] = input;
  fixture["expected"] = {{"values", refparse::ref_parse_numbered_list(input)}};
  write_fixture(std::move(fixture));
}

void entity_pair_fixture(const std::string& input) {
  ordered_json fixture;
  fixture["parser"] = "entity_pair";
  fixture["input"] = input;
  auto r = refparse::ref_parse_entity_pair(input);
  ordered_json expected;
  expected["ok"] = r.ok;
  if (r.ok) {
    expected["head"] = r.head;
    expected["tail"] = r.tail;
  } else {
    expected["reason"] = r.reason;
  }
  fixture["expected"] = std::move(expected);
  write_fixture(std::move(fixture));
}

void entity_pairs_fixture(const std::string& input) {
  ordered_json fixture;
  fixture["parser"] = "entity_pairs";
  fixture["input"] = input;
  ordered_json pairs = ordered_json::array();
  for (const auto& [h, t] : refparse::ref_parse_entity_pairs(input)) {
    pairs.push_back({h, t});
  }
  fixture["expected"] = {{"pairs", std::move(pairs)}};
  write_fixture(std::move(fixture));
}

ordered_json aste_expected(const refparse::RefTripletsResult& r) {
  ordered_json expected;
  expected["ok"] = r.ok;
  if (r.ok) {
    ordered_json triplets = ordered_json::array();
    for (const auto& t : r.triplets) triplets.push_back({t.target, t.opinion, t.sentiment});
    expected["triplets"] = std::move(triplets);
  } else {
    expected["reason"] = r.reason;
  }
  return expected;
}

void aste_fixture(int variant, const std::string& input) {
  ordered_json fixture;
  fixture["parser"] = "aste";
  fixture["variant"] = variant;
  fixture["input"] = input;
  fixture["expected"] = aste_expected(refparse::ref_parse_aste(input, variant));
  write_fixture(std::move(fixture));
}

void aste_fixture_pinned(int variant, const std::string& input, ordered_json expected) {
  auto computed = aste_expected(refparse::ref_parse_aste(input, variant));
  if (computed != expected) {
    std::fprintf(stderr, "pinned aste fixture disagrees with reference for input %s\ncomputed %s\n",
                 input.c_str(), computed.dump().c_str());
    std::exit(1);
  }
  ordered_json fixture;
  fixture["parser"] = "aste";
  fixture["variant"] = variant;
  fixture["input"] = input;
  fixture["expected"] = std::move(expected);
  write_fixture(std::move(fixture));
}

const std::vector<std::string> kSst2 = {"Positive", "Negative"};
const std::vector<std::string> kRelations = {
    "place served by transport hub", "mountain range", "religion", "head of government",
    "country of citizenship", "language of work or name"};
const std::vector<std::string> kTypes = {"researcher", "university", "programming language",
                                         "product", "misc"};

void hand_pinned_fixtures() {
  // Label answers.
  label_fixture_pinned(kSst2, " Positive\n", {{"ok", true}, {"value", "Positive"}});
  label_fixture_pinned(kSst2, "positive.", {{"ok", true}, {"value", "Positive"}});
  label_fixture_pinned(kSst2, "mostly good", {{"ok", false}, {"reason", "no_match"}});
  label_fixture_pinned(kSst2, "", {{"ok", false}, {"reason", "empty"}});
  label_fixture_pinned(kSst2, "Sentiment: Negative", {{"ok", true}, {"value", "Negative"}});
  label_fixture_pinned(kRelations, "mountain range", {{"ok", true}, {"value", "mountain range"}});
  label_fixture_pinned(kRelations, "Relation: head of government",
                       {{"ok", true}, {"value", "head of government"}});
  label_fixture_pinned(kTypes, "Entity Type: researcher", {{"ok", true}, {"value", "researcher"}});
  label_fixture_pinned(kSst2, "...", {{"ok", false}, {"reason", "empty"}});

  // Entity lists.
  entity_list_fixture("Marvin Minsky; Seymour Papert;");
  entity_list_fixture("");
  entity_list_fixture("MIT; MIT; mit");
  entity_list_fixture("None");
  entity_list_fixture("N/A");
  entity_list_fixture("David Silver;  Fei-Fei Li ;None; Claude Shannon");

  // Numbered lists.
  numbered_list_fixture("1. David Silver\n2. Fei-Fei Li");
  numbered_list_fixture("David Silver");
  numbered_list_fixture("1. A\nnoise\n2) B");
  numbered_list_fixture("1.\n2. kept");

  // Entity pairs.
  entity_pair_fixture("Head Entity: France; Tail Entity: Élisabeth Borne");
  entity_pair_fixture("Head Entity: ; Tail Entity: X");
  entity_pair_fixture("Head Entity: United States; Tail Entity: Chester Alan Arthur");
  entity_pair_fixture("Head Entity: X");
  entity_pair_fixture("no markers at all");
  entity_pairs_fixture(
      " United States; Tail Entity: Chester Alan Arthur\n"
      "Head Entity: France; Tail Entity: Emmanuel Macron\n"
      "Head Entity: Japan; Tail Entity: Fumio Kishida");

  // ASTE, the three answer grammars.
  aste_fixture_pinned(
      1, "Target0: instructions; Opinion0: problem; Sentiment0: negative",
      {{"ok", true},
       {"triplets", ordered_json::array({{"instructions", "problem", "negative"}})}});
  aste_fixture_pinned(
      1,
      " instructions; Opinion0: problem; Sentiment0: negative\n"
      "Target1: instructions; Opinion1: no; Sentiment1: negative",
      {{"ok", true},
       {"triplets", ordered_json::array({{"instructions", "problem", "negative"},
                                         {"instructions", "no", "negative"}})}});
  aste_fixture_pinned(
      2, "Target: instructions; instructions;\nOpinion: problem; no;\nSentiment: negative; negative;",
      {{"ok", true},
       {"triplets", ordered_json::array({{"instructions", "problem", "negative"},
                                         {"instructions", "no", "negative"}})}});
  aste_fixture_pinned(2, "Target: a; b;\nOpinion: c;\nSentiment: negative;",
                      {{"ok", false}, {"reason", "length_mismatch"}});
  aste_fixture_pinned(
      3, "Target0: is instructions. Its opinion span is no. Its sentiment is negative.",
      {{"ok", true}, {"triplets", ordered_json::array({{"instructions", "no", "negative"}})}});
  aste_fixture_pinned(1, "Target0: a; Opinion0: b; Sentiment0: sideways",
                      {{"ok", false}, {"reason", "bad_sentiment"}});
  aste_fixture_pinned(1, "None", {{"ok", true}, {"triplets", ordered_json::array()}});
  aste_fixture_pinned(1, "I cannot identify any triplets here",
                      {{"ok", false}, {"reason", "grammar"}});
  aste_fixture_pinned(
      3, " instructions. Its opinion span is problem. Its sentiment is negative.",
      {{"ok", true}, {"triplets", ordered_json::array({{"instructions", "problem", "negative"}})}});
}

// ---------------------------------------------------------------------------
// Constructed corpus

const char* kSurfaces[] = {"battery life", "instructions", "screen", "keyboard", "port layout",
                           "price",        "speakers",     "builds", "trackpad", "cooling fan"};
const char* kOpinions[] = {"great", "problem", "no", "mediocre", "excellent",
                           "poor",  "loud",    "crisp", "sturdy", "flimsy"};
const char* kSentiments[] = {"positive", "negative", "neutral", "Positive", "NEGATIVE",
                             "mixed", "angry"};
const char* kNames[] = {"David Silver",   "Fei-Fei Li",     "Claude Shannon", "Marvin Minsky",
                        "Seymour Papert", "Alan Turing",    "Grace Hopper",   "John McCarthy",
                        "Ada Lovelace",   "Geoffrey Hinton"};

void constructed_fixtures() {
  annotis::Rng rng(20240811);

  // Label parser mutations: casing, punctuation, echoes, noise.
  const std::vector<std::vector<std::string>> spaces = {kSst2, kRelations, kTypes};
  const char* echoes[] = {"", "Sentiment: ", "Relation: ", "Entity Type: "};
  const char* suffixes[] = {"", ".", "!", "\nText: leftover", ";"};
  for (int i = 0; i < 40; ++i) {
    const auto& space = spaces[rng.below(spaces.size())];
    std::string core;
    if (rng.below(5) == 0) {
      core = "totally unrelated answer";
    } else {
      core = space[rng.below(space.size())];
      if (rng.below(2) == 0) {
        for (char& c : core) {
          if (rng.below(3) == 0 && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
        }
      }
    }
    std::string input = std::string(echoes[rng.below(4)]) + core + suffixes[rng.below(5)];
    if (rng.below(6) == 0) input = "  " + input;
    label_fixture(space, input);
  }

  // Entity lists with separators, duplicates and None markers.
  for (int i = 0; i < 25; ++i) {
    std::size_t n = rng.below(5);
    std::string input;
    for (std::size_t k = 0; k < n; ++k) {
      std::string name = kNames[rng.below(10)];
      if (rng.below(4) == 0) name = kNames[rng.below(3)];  // induce duplicates
      input += name;
      input += rng.below(3) == 0 ? " ;" : ";";
      if (rng.below(4) == 0) input += " ";
    }
    if (rng.below(3) == 0) input += "None;";
    if (rng.below(5) == 0) input += " n/a ;";
    if (rng.below(6) == 0) input += "; ;";
    entity_list_fixture(input);
  }

  // Numbered lists with mixed prefixes and noise.
  for (int i = 0; i < 20; ++i) {
    std::size_t n = 1 + rng.below(5);
    std::string input;
    for (std::size_t k = 0; k < n; ++k) {
      switch (rng.below(4)) {
        case 0: input += std::to_string(k + 1) + ". " + kNames[rng.below(10)]; break;
        case 1: input += std::to_string(k + 1) + ") " + kNames[rng.below(10)]; break;
        case 2: input += "interlude without index"; break;
        default: input += std::to_string(k + 1) + "." + kNames[rng.below(10)]; break;
      }
      input += "\n";
    }
    numbered_list_fixture(input);
  }

  // Entity pairs: single answers and multi-line batches.
  for (int i = 0; i < 20; ++i) {
    std::string head = kNames[rng.below(10)];
    std::string tail = kNames[rng.below(10)];
    std::string input;
    switch (rng.below(5)) {
      case 0: input = "Head Entity: " + head + "; Tail Entity: " + tail; break;
      case 1: input = "head entity: " + head + " ; tail entity: " + tail + ";"; break;
      case 2: input = "Head Entity: " + head + ";"; break;
      case 3: input = "Tail Entity: " + tail; break;
      default: input = "Head Entity: ; Tail Entity: " + tail; break;
    }
    entity_pair_fixture(input);
  }
  for (int i = 0; i < 10; ++i) {
    std::size_t n = 1 + rng.below(4);
    std::string input;
    bool echo = rng.below(2) == 0;
    for (std::size_t k = 0; k < n; ++k) {
      std::string head = kNames[rng.below(10)];
      std::string tail = kNames[rng.below(10)];
      if (k == 0 && echo) {
        input += " " + head + "; Tail Entity: " + tail + "\n";
      } else if (rng.below(5) == 0) {
        input += "garbage line\n";
      } else {
        input += "Head Entity: " + head + "; Tail Entity: " + tail + "\n";
      }
    }
    entity_pairs_fixture(input);
  }

  // ASTE grammars.
  for (int i = 0; i < 25; ++i) {
    std::size_t n = 1 + rng.below(3);
    bool echo = rng.below(3) == 0;
    std::string input;
    for (std::size_t k = 0; k < n; ++k) {
      std::string idx = std::to_string(k);
      std::string clause = "Target" + idx + ": " + kSurfaces[rng.below(10)] + "; Opinion" + idx +
                           ": " + kOpinions[rng.below(10)] + "; Sentiment" + idx + ": " +
                           kSentiments[rng.below(7)];
      if (k == 0 && echo) {
        clause = clause.substr(std::string("Target0:").size());
      }
      input += clause;
      if (k + 1 < n) input += "\n";
    }
    aste_fixture(1, input);
  }
  for (int i = 0; i < 15; ++i) {
    std::size_t n_t = 1 + rng.below(3);
    std::size_t n_o = rng.below(4) == 0 ? n_t + 1 : n_t;
    std::string input = rng.below(3) == 0 ? "" : "Target: ";
    if (input.empty()) input = " ";
    for (std::size_t k = 0; k < n_t; ++k) input += std::string(kSurfaces[rng.below(10)]) + "; ";
    input += "\nOpinion: ";
    for (std::size_t k = 0; k < n_o; ++k) input += std::string(kOpinions[rng.below(10)]) + "; ";
    input += "\nSentiment: ";
    for (std::size_t k = 0; k < n_t; ++k) input += std::string(kSentiments[rng.below(7)]) + "; ";
    aste_fixture(2, input);
  }
  for (int i = 0; i < 15; ++i) {
    std::size_t n = 1 + rng.below(2);
    bool echo = rng.below(3) == 0;
    std::string input;
    for (std::size_t k = 0; k < n; ++k) {
      std::string idx = std::to_string(k);
      std::string clause = "Target" + idx + ": is " + kSurfaces[rng.below(10)] +
                           ". Its opinion span is " + kOpinions[rng.below(10)] +
                           ". Its sentiment is " + kSentiments[rng.below(7)] + ".";
      if (k == 0 && echo) clause = clause.substr(std::string("Target0: is").size());
      input += clause;
      if (k + 1 < n) input += "\n";
    }
    aste_fixture(3, input);
  }

  // Degenerate inputs across parsers.
  aste_fixture(1, "");
  aste_fixture(2, "none.");
  aste_fixture(3, "N/A");
  aste_fixture(1, "Target0 instructions problem negative");
  entity_list_fixture(";;;");
  numbered_list_fixture("\n\n");
  entity_pair_fixture("Head Entity:; Tail Entity:;");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_fixtures <output-dir>\n");
    return 1;
  }
  g_out_dir = argv[1];
  fs::create_directories(g_out_dir);
  hand_pinned_fixtures();
  constructed_fixtures();
  std::printf("wrote %d fixtures to %s\n", g_counter, g_out_dir.string().c_str());
  return 0;
}
