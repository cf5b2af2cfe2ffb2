#include "annotis/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "annotis/rng.hpp"
#include "annotis/text.hpp"

namespace annotis {

using ordered_json = nlohmann::ordered_json;

const char* to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::JsonlClassification: return "jsonl_classification";
    case DatasetFormat::JsonlRelation: return "jsonl_relation";
    case DatasetFormat::ConllBio: return "conll_bio";
    case DatasetFormat::AsteIndexed: return "aste_indexed";
  }
  return "unknown";
}

std::optional<DatasetFormat> dataset_format_from_string(const std::string& name) {
  std::string n = fold_case(trim(name));
  if (n == "jsonl_classification") return DatasetFormat::JsonlClassification;
  if (n == "jsonl_relation") return DatasetFormat::JsonlRelation;
  if (n == "conll_bio") return DatasetFormat::ConllBio;
  if (n == "aste_indexed") return DatasetFormat::AsteIndexed;
  return std::nullopt;
}

DatasetFormat default_format_for(TaskKind kind) {
  switch (kind) {
    case TaskKind::Classification: return DatasetFormat::JsonlClassification;
    case TaskKind::RelationExtraction: return DatasetFormat::JsonlRelation;
    case TaskKind::Ner: return DatasetFormat::ConllBio;
    case TaskKind::Aste: return DatasetFormat::AsteIndexed;
  }
  return DatasetFormat::JsonlClassification;
}

// ---------------------------------------------------------------------------
// BIO

bool bio_well_formed(const std::vector<std::string>& tags) {
  std::string prev_type;  // empty when previous tag is O
  for (const auto& tag : tags) {
    if (tag == "O") {
      prev_type.clear();
      continue;
    }
    if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-') return false;
    std::string type = tag.substr(2);
    if (tag[0] == 'I' && type != prev_type) return false;
    prev_type = type;
  }
  return true;
}

std::vector<std::string> spans_to_bio(const std::string& sentence,
                                      const std::vector<EntitySpan>& spans) {
  auto tokens = tokenize(sentence);
  std::vector<std::string> tags(tokens.size(), "O");
  for (const auto& span : spans) {
    std::size_t first = tokens.size(), last = tokens.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].start >= span.start && tokens[i].end <= span.end) {
        if (first == tokens.size()) first = i;
        last = i;
      }
    }
    if (first == tokens.size() || tokens[first].start != span.start ||
        tokens[last].end != span.end) {
      throw FormatViolation("span '" + span.surface + "' is not token-aligned");
    }
    for (std::size_t i = first; i <= last; ++i) {
      if (tags[i] != "O") {
        throw FormatViolation("overlapping spans at token " + std::to_string(i));
      }
      tags[i] = (i == first ? "B-" : "I-") + span.entity_type;
    }
  }
  if (!bio_well_formed(tags)) {
    throw FormatViolation("emitted BIO sequence is malformed");
  }
  return tags;
}

std::vector<EntitySpan> bio_to_spans(const std::vector<std::string>& tokens,
                                     const std::vector<std::string>& tags) {
  if (tokens.size() != tags.size()) {
    throw FormatViolation("token/tag count mismatch");
  }
  // Offsets in the space-joined sentence.
  std::vector<std::size_t> starts(tokens.size(), 0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    starts[i] = offset;
    offset += tokens[i].size() + 1;
  }

  std::vector<EntitySpan> spans;
  std::string open_type;
  std::size_t open_first = 0;
  auto close = [&](std::size_t last) {
    std::vector<std::string> parts(tokens.begin() + static_cast<long>(open_first),
                                   tokens.begin() + static_cast<long>(last) + 1);
    EntitySpan span;
    span.surface = join(parts, " ");
    span.start = starts[open_first];
    span.end = starts[last] + tokens[last].size();
    span.entity_type = open_type;
    spans.push_back(std::move(span));
    open_type.clear();
  };

  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    if (tag == "O") {
      if (!open_type.empty()) close(i - 1);
      continue;
    }
    if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-') {
      throw FormatViolation("bad tag syntax: " + tag);
    }
    std::string type = tag.substr(2);
    if (tag[0] == 'B') {
      if (!open_type.empty()) close(i - 1);
      open_type = type;
      open_first = i;
    } else {
      if (open_type != type) {
        throw FormatViolation("I-" + type + " without a matching B- at token " +
                              std::to_string(i));
      }
    }
  }
  if (!open_type.empty()) close(tags.size() - 1);
  return spans;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

void reject_newlines(const std::string& text, const char* what) {
  if (text.find('\n') != std::string::npos || text.find('\r') != std::string::npos) {
    throw FormatViolation(std::string(what) + " contains a line break");
  }
}

std::string index_list_repr(const std::vector<std::size_t>& idx) {
  std::string out = "[";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(idx[i]);
  }
  out += "]";
  return out;
}

std::string emit_classification(const std::vector<AnnotatedInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    const auto& c = std::get<ClassificationInstance>(inst.payload);
    ordered_json record;
    record["text"] = c.text;
    record["label"] = c.label;
    out += record.dump();
    out += "\n";
  }
  return out;
}

std::string emit_relation(const std::vector<AnnotatedInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    const auto& r = std::get<RelationInstance>(inst.payload);
    ordered_json record;
    record["sentence"] = r.sentence;
    record["head"] = r.head.surface;
    record["tail"] = r.tail.surface;
    record["relation"] = r.relation;
    out += record.dump();
    out += "\n";
  }
  return out;
}

std::string emit_bio(const std::vector<AnnotatedInstance>& instances) {
  std::string out;
  bool first = true;
  for (const auto& inst : instances) {
    const auto& nr = std::get<NerInstance>(inst.payload);
    if (!first) out += "\n";
    first = false;
    auto tokens = tokenize(nr.sentence);
    auto tags = spans_to_bio(nr.sentence, nr.spans);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      out += tokens[i].text;
      out += "\t";
      out += tags[i];
      out += "\n";
    }
  }
  return out;
}

std::string emit_aste(const std::vector<AnnotatedInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    const auto& as = std::get<AsteInstance>(inst.payload);
    reject_newlines(as.sentence, "sentence");
    if (as.sentence.find("####") != std::string::npos) {
      throw FormatViolation("sentence contains the '####' separator");
    }
    out += as.sentence;
    out += "####[";
    for (std::size_t i = 0; i < as.triplets.size(); ++i) {
      if (i > 0) out += ", ";
      const auto& t = as.triplets[i];
      out += "(" + index_list_repr(t.target) + ", " + index_list_repr(t.opinion) + ", '" +
             sentiment_code(t.sentiment) + "')";
    }
    out += "]\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ingestion

AnnotatedInstance make_gold(std::variant<ClassificationInstance, RelationInstance, NerInstance,
                                         AsteInstance> payload) {
  AnnotatedInstance inst;
  inst.payload = std::move(payload);
  inst.provenance = Provenance::Gold;
  return inst;
}

std::vector<AnnotatedInstance> ingest_classification(const std::string& content,
                                                     const std::string& path) {
  std::vector<AnnotatedInstance> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto doc = nlohmann::json::parse(line);
      ClassificationInstance c;
      c.text = doc.at("text").get<std::string>();
      c.label = doc.at("label").get<std::string>();
      out.push_back(make_gold(std::move(c)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatViolation(e.what(), path, line_no);
    }
  }
  return out;
}

std::vector<AnnotatedInstance> ingest_relation(const std::string& content,
                                               const std::string& path) {
  std::vector<AnnotatedInstance> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto doc = nlohmann::json::parse(line);
      RelationInstance r;
      r.sentence = doc.at("sentence").get<std::string>();
      r.head.surface = doc.at("head").get<std::string>();
      r.tail.surface = doc.at("tail").get<std::string>();
      r.relation = doc.at("relation").get<std::string>();
      out.push_back(make_gold(std::move(r)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatViolation(e.what(), path, line_no);
    }
  }
  return out;
}

std::vector<AnnotatedInstance> ingest_bio(const std::string& content, const std::string& path) {
  std::vector<AnnotatedInstance> out;
  std::vector<std::string> tokens, tags;
  std::size_t line_no = 0;
  std::size_t block_start = 1;

  auto flush = [&] {
    if (tokens.empty()) return;
    NerInstance nr;
    nr.sentence = join(tokens, " ");
    try {
      nr.spans = bio_to_spans(tokens, tags);
    } catch (const FormatViolation& e) {
      throw FormatViolation(e.what(), path, block_start);
    }
    out.push_back(make_gold(std::move(nr)));
    tokens.clear();
    tags.clear();
  };

  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) {
      flush();
      block_start = line_no + 1;
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw FormatViolation("expected token<TAB>tag", path, line_no);
    }
    tokens.push_back(line.substr(0, tab));
    tags.push_back(line.substr(tab + 1));
  }
  flush();
  return out;
}

// Minimal recursive parse of "[([1, 2], [4], 'POS'), ...]".
struct AsteListParser {
  const std::string& text;
  std::size_t pos = 0;

  explicit AsteListParser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && is_space_byte(text[pos])) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) {
      throw FormatViolation(std::string("expected '") + c + "' at byte " + std::to_string(pos));
    }
  }

  std::vector<std::size_t> parse_index_list() {
    expect('[');
    std::vector<std::size_t> out;
    skip_ws();
    if (eat(']')) return out;
    while (true) {
      skip_ws();
      std::size_t start = pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      if (pos == start) throw FormatViolation("expected index at byte " + std::to_string(pos));
      out.push_back(static_cast<std::size_t>(std::stoull(text.substr(start, pos - start))));
      if (eat(']')) return out;
      expect(',');
    }
  }

  std::string parse_quoted() {
    expect('\'');
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != '\'') ++pos;
    if (pos >= text.size()) throw FormatViolation("unterminated sentiment code");
    std::string out = text.substr(start, pos - start);
    ++pos;
    return out;
  }
};

std::vector<AnnotatedInstance> ingest_aste(const std::string& content, const std::string& path) {
  std::vector<AnnotatedInstance> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto sep = line.find("####");
    if (sep == std::string::npos) {
      throw FormatViolation("missing '####' separator", path, line_no);
    }
    AsteInstance as;
    as.sentence = line.substr(0, sep);
    auto tokens = tokenize(as.sentence);
    std::string triplet_text = line.substr(sep + 4);
    try {
      AsteListParser parser(triplet_text);
      parser.expect('[');
      parser.skip_ws();
      if (!parser.eat(']')) {
        while (true) {
          parser.expect('(');
          AsteTriplet t;
          t.target = parser.parse_index_list();
          parser.expect(',');
          t.opinion = parser.parse_index_list();
          parser.expect(',');
          auto code = parser.parse_quoted();
          auto sentiment = sentiment_from_code(code);
          if (!sentiment) throw FormatViolation("unknown sentiment code '" + code + "'");
          t.sentiment = *sentiment;
          parser.expect(')');
          for (std::size_t idx : t.target) {
            if (idx >= tokens.size()) throw FormatViolation("target index out of range");
          }
          for (std::size_t idx : t.opinion) {
            if (idx >= tokens.size()) throw FormatViolation("opinion index out of range");
          }
          std::vector<std::string> target_parts, opinion_parts;
          for (std::size_t idx : t.target) target_parts.push_back(tokens[idx].text);
          for (std::size_t idx : t.opinion) opinion_parts.push_back(tokens[idx].text);
          t.target_surface = join(target_parts, " ");
          t.opinion_surface = join(opinion_parts, " ");
          as.triplets.push_back(std::move(t));
          if (parser.eat(']')) break;
          parser.expect(',');
        }
      }
    } catch (const FormatViolation& e) {
      throw FormatViolation(e.what(), path, line_no);
    }
    out.push_back(make_gold(std::move(as)));
  }
  return out;
}

TaskKind kind_for_format(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::JsonlClassification: return TaskKind::Classification;
    case DatasetFormat::JsonlRelation: return TaskKind::RelationExtraction;
    case DatasetFormat::ConllBio: return TaskKind::Ner;
    case DatasetFormat::AsteIndexed: return TaskKind::Aste;
  }
  return TaskKind::Classification;
}

}  // namespace

std::string emit_dataset(const std::vector<AnnotatedInstance>& instances, DatasetFormat format) {
  for (const auto& inst : instances) {
    if (inst.kind() != kind_for_format(format)) {
      throw FormatViolation("instance kind does not match dataset format " +
                            std::string(to_string(format)));
    }
  }
  switch (format) {
    case DatasetFormat::JsonlClassification: return emit_classification(instances);
    case DatasetFormat::JsonlRelation: return emit_relation(instances);
    case DatasetFormat::ConllBio: return emit_bio(instances);
    case DatasetFormat::AsteIndexed: return emit_aste(instances);
  }
  return "";
}

std::vector<AnnotatedInstance> ingest_dataset(const std::string& content, DatasetFormat format,
                                              const std::string& path_hint) {
  switch (format) {
    case DatasetFormat::JsonlClassification: return ingest_classification(content, path_hint);
    case DatasetFormat::JsonlRelation: return ingest_relation(content, path_hint);
    case DatasetFormat::ConllBio: return ingest_bio(content, path_hint);
    case DatasetFormat::AsteIndexed: return ingest_aste(content, path_hint);
  }
  return {};
}

DatasetFile write_dataset_file(const std::string& path,
                               const std::vector<AnnotatedInstance>& instances,
                               DatasetFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatViolation("cannot open for writing", path, 0);
  out << emit_dataset(instances, format);
  return {path, format, instances.size()};
}

std::vector<AnnotatedInstance> read_dataset_file(const std::string& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatViolation("cannot open for reading", path, 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ingest_dataset(buffer.str(), format, path);
}

// ---------------------------------------------------------------------------
// Dedup and split

namespace {

std::string collapse_ws(const std::string& s) {
  std::string out;
  bool in_ws = false;
  for (char c : s) {
    if (is_space_byte(c)) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(c);
  }
  return out;
}

std::string annotation_key(const AnnotatedInstance& inst) {
  std::string key;
  switch (inst.payload.index()) {
    case 0: {
      const auto& c = std::get<ClassificationInstance>(inst.payload);
      key = "c|" + c.label;
      break;
    }
    case 1: {
      const auto& r = std::get<RelationInstance>(inst.payload);
      key = "r|" + r.head.surface + "|" + r.tail.surface + "|" + r.relation;
      break;
    }
    case 2: {
      const auto& nr = std::get<NerInstance>(inst.payload);
      key = "n";
      for (const auto& s : nr.spans) {
        key += "|" + std::to_string(s.start) + "," + std::to_string(s.end) + "," + s.entity_type;
      }
      break;
    }
    default: {
      const auto& as = std::get<AsteInstance>(inst.payload);
      key = "a";
      for (const auto& t : as.triplets) {
        key += "|";
        for (auto i : t.target) key += std::to_string(i) + ".";
        key += ",";
        for (auto i : t.opinion) key += std::to_string(i) + ".";
        key += ",";
        key += sentiment_code(t.sentiment);
      }
      break;
    }
  }
  return key;
}

}  // namespace

std::vector<AnnotatedInstance> dedup(const std::vector<AnnotatedInstance>& instances) {
  std::vector<AnnotatedInstance> out;
  std::set<std::string> seen;
  for (const auto& inst : instances) {
    std::string key = collapse_ws(fold_case(inst.text())) + "\x1f" + annotation_key(inst);
    if (seen.insert(std::move(key)).second) out.push_back(inst);
  }
  return out;
}

std::pair<std::vector<AnnotatedInstance>, std::vector<AnnotatedInstance>> split_dataset(
    const std::vector<AnnotatedInstance>& instances, double train_ratio, double dev_ratio,
    std::uint64_t seed) {
  if (std::abs(train_ratio + dev_ratio - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
  std::vector<std::size_t> order(instances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  auto n_train = static_cast<std::size_t>(
      std::llround(train_ratio * static_cast<double>(instances.size())));
  if (n_train > instances.size()) n_train = instances.size();

  std::pair<std::vector<AnnotatedInstance>, std::vector<AnnotatedInstance>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(instances[order[i]]);
  }
  return out;
}

}  // namespace annotis
