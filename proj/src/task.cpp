#include "annotis/task.hpp"

#include <algorithm>
#include <set>

#include "annotis/text.hpp"

namespace annotis {

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Classification: return "classification";
    case TaskKind::RelationExtraction: return "relation_extraction";
    case TaskKind::Ner: return "ner";
    case TaskKind::Aste: return "aste";
  }
  return "unknown";
}

std::optional<TaskKind> task_kind_from_string(const std::string& name) {
  std::string n = fold_case(trim(name));
  if (n == "classification") return TaskKind::Classification;
  if (n == "relation_extraction" || n == "relation-extraction" || n == "re")
    return TaskKind::RelationExtraction;
  if (n == "ner") return TaskKind::Ner;
  if (n == "aste") return TaskKind::Aste;
  return std::nullopt;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Pgda: return "pgda";
    case Provenance::Pgdg: return "pgdg";
    case Provenance::Dadg: return "dadg";
    case Provenance::Pgi: return "pgi";
    case Provenance::Gold: return "gold";
    case Provenance::Mock: return "mock";
  }
  return "unknown";
}

std::optional<Provenance> provenance_from_string(const std::string& name) {
  std::string n = fold_case(trim(name));
  if (n == "pgda") return Provenance::Pgda;
  if (n == "pgdg") return Provenance::Pgdg;
  if (n == "dadg") return Provenance::Dadg;
  if (n == "pgi") return Provenance::Pgi;
  if (n == "gold") return Provenance::Gold;
  if (n == "mock") return Provenance::Mock;
  return std::nullopt;
}

std::optional<std::string> LabelSpace::canonical(const std::string& candidate) const {
  std::string folded = fold_case(trim(candidate));
  for (const auto& label : labels) {
    if (fold_case(label) == folded) return label;
  }
  return std::nullopt;
}

const std::string* LabelSpace::definition_of(const std::string& label) const {
  auto canon = canonical(label);
  if (!canon) return nullptr;
  auto it = definitions.find(*canon);
  return it == definitions.end() ? nullptr : &it->second;
}

std::size_t LabelSpace::index_of(const std::string& label) const {
  std::string folded = fold_case(trim(label));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (fold_case(labels[i]) == folded) return i;
  }
  return static_cast<std::size_t>(-1);
}

std::vector<std::string> LabelSpace::validate() const {
  std::vector<std::string> violations;
  if (labels.empty()) violations.push_back("label space is empty");
  std::set<std::string> seen;
  for (const auto& label : labels) {
    if (!seen.insert(fold_case(label)).second)
      violations.push_back("duplicate label after case folding: " + label);
  }
  for (const auto& [key, _] : definitions) {
    if (seen.find(fold_case(key)) == seen.end())
      violations.push_back("definition for unknown label: " + key);
  }
  return violations;
}

std::vector<Token> tokenize(const std::string& sentence) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = sentence.size();
  while (i < n) {
    if (is_space_byte(sentence[i])) {
      ++i;
      continue;
    }
    std::size_t chunk_end = i;
    while (chunk_end < n && !is_space_byte(sentence[chunk_end])) ++chunk_end;

    std::size_t b = i;
    while (b < chunk_end && is_punct_byte(sentence[b])) {
      tokens.push_back({sentence.substr(b, 1), b, b + 1});
      ++b;
    }
    std::size_t e = chunk_end;
    while (e > b && is_punct_byte(sentence[e - 1])) --e;
    if (b < e) tokens.push_back({sentence.substr(b, e - b), b, e});
    for (std::size_t k = e; k < chunk_end; ++k) {
      tokens.push_back({sentence.substr(k, 1), k, k + 1});
    }
    i = chunk_end;
  }
  return tokens;
}

std::vector<std::string> token_texts(const std::string& sentence) {
  std::vector<std::string> out;
  for (auto& t : tokenize(sentence)) out.push_back(std::move(t.text));
  return out;
}

const char* to_string(Sentiment s) {
  switch (s) {
    case Sentiment::Positive: return "positive";
    case Sentiment::Negative: return "negative";
    case Sentiment::Neutral: return "neutral";
  }
  return "neutral";
}

std::optional<Sentiment> sentiment_from_string(const std::string& text) {
  std::string n = fold_case(strip_surrounding_punct(text));
  if (n == "positive") return Sentiment::Positive;
  if (n == "negative") return Sentiment::Negative;
  if (n == "neutral") return Sentiment::Neutral;
  return std::nullopt;
}

const char* sentiment_code(Sentiment s) {
  switch (s) {
    case Sentiment::Positive: return "POS";
    case Sentiment::Negative: return "NEG";
    case Sentiment::Neutral: return "NEU";
  }
  return "NEU";
}

std::optional<Sentiment> sentiment_from_code(const std::string& code) {
  std::string n = trim(code);
  if (n == "POS") return Sentiment::Positive;
  if (n == "NEG") return Sentiment::Negative;
  if (n == "NEU") return Sentiment::Neutral;
  return std::nullopt;
}

TaskKind AnnotatedInstance::kind() const {
  switch (payload.index()) {
    case 0: return TaskKind::Classification;
    case 1: return TaskKind::RelationExtraction;
    case 2: return TaskKind::Ner;
    default: return TaskKind::Aste;
  }
}

const std::string& AnnotatedInstance::text() const {
  switch (payload.index()) {
    case 0: return std::get<ClassificationInstance>(payload).text;
    case 1: return std::get<RelationInstance>(payload).sentence;
    case 2: return std::get<NerInstance>(payload).sentence;
    default: return std::get<AsteInstance>(payload).sentence;
  }
}

namespace {

bool indices_contiguous(const std::vector<std::size_t>& idx) {
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (idx[i] != idx[i - 1] + 1) return false;
  }
  return true;
}

std::string joined_surface(const std::vector<Token>& tokens, const std::vector<std::size_t>& idx) {
  std::vector<std::string> parts;
  for (std::size_t i : idx) {
    if (i < tokens.size()) parts.push_back(tokens[i].text);
  }
  return join(parts, " ");
}

void check_mention(const Mention& m, const std::string& sentence, const char* role,
                   std::vector<std::string>& out) {
  if (m.surface.empty()) {
    out.push_back(std::string(role) + " surface is empty");
    return;
  }
  if (m.start && m.end) {
    if (*m.start >= *m.end || *m.end > sentence.size()) {
      out.push_back(std::string(role) + " offsets out of range");
    } else if (sentence.substr(*m.start, *m.end - *m.start) != m.surface) {
      out.push_back(std::string(role) + " offsets do not slice to the surface");
    }
  } else if (sentence.find(m.surface) == std::string::npos) {
    out.push_back(std::string(role) + " surface not found in sentence");
  }
}

}  // namespace

std::vector<std::string> validate_instance(const AnnotatedInstance& inst, const TaskSpec& spec) {
  std::vector<std::string> violations;
  if (inst.kind() != spec.kind) {
    violations.push_back("instance kind does not match task kind");
    return violations;
  }

  switch (spec.kind) {
    case TaskKind::Classification: {
      const auto& c = std::get<ClassificationInstance>(inst.payload);
      if (!spec.label_space.contains(c.label))
        violations.push_back("unknown label: " + c.label);
      break;
    }
    case TaskKind::RelationExtraction: {
      const auto& r = std::get<RelationInstance>(inst.payload);
      if (!spec.label_space.contains(r.relation))
        violations.push_back("unknown relation: " + r.relation);
      check_mention(r.head, r.sentence, "head", violations);
      check_mention(r.tail, r.sentence, "tail", violations);
      break;
    }
    case TaskKind::Ner: {
      const auto& nr = std::get<NerInstance>(inst.payload);
      for (const auto& span : nr.spans) {
        if (span.start >= span.end) {
          violations.push_back("empty span: " + span.surface);
          continue;
        }
        if (span.end > nr.sentence.size()) {
          violations.push_back("span out of range: " + span.surface);
          continue;
        }
        if (nr.sentence.substr(span.start, span.end - span.start) != span.surface)
          violations.push_back("span slice does not equal surface: " + span.surface);
        if (!spec.label_space.contains(span.entity_type))
          violations.push_back("unknown entity type: " + span.entity_type);
      }
      for (std::size_t i = 0; i < nr.spans.size(); ++i) {
        for (std::size_t j = i + 1; j < nr.spans.size(); ++j) {
          const auto& a = nr.spans[i];
          const auto& b = nr.spans[j];
          if (a.start < b.end && b.start < a.end)
            violations.push_back("overlap: " + a.surface + " / " + b.surface);
        }
      }
      break;
    }
    case TaskKind::Aste: {
      const auto& as = std::get<AsteInstance>(inst.payload);
      auto tokens = tokenize(as.sentence);
      for (const auto& t : as.triplets) {
        if (t.target.empty() || t.opinion.empty()) {
          violations.push_back("empty index list");
          continue;
        }
        if (!indices_contiguous(t.target) || !indices_contiguous(t.opinion))
          violations.push_back("index list not contiguous");
        if (t.target.back() >= tokens.size() || t.opinion.back() >= tokens.size()) {
          violations.push_back("index out of range");
          continue;
        }
        if (joined_surface(tokens, t.target) != t.target_surface)
          violations.push_back("target surface does not match tokens: " + t.target_surface);
        if (joined_surface(tokens, t.opinion) != t.opinion_surface)
          violations.push_back("opinion surface does not match tokens: " + t.opinion_surface);
      }
      break;
    }
  }
  return violations;
}

}  // namespace annotis
