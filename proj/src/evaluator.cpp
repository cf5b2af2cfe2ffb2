#include "annotis/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "annotis/text.hpp"

namespace annotis {

namespace {

std::vector<std::string> folded_tokens(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& token : token_texts(text)) out.push_back(fold_case(token));
  return out;
}

double percent(double num, double den) { return den == 0.0 ? 0.0 : 100.0 * num / den; }

void fill_prf(EvalReport& report) {
  double p = (report.tp + report.fp) == 0 ? 0.0
                                          : static_cast<double>(report.tp) /
                                                static_cast<double>(report.tp + report.fp);
  double r = (report.tp + report.fn) == 0 ? 0.0
                                          : static_cast<double>(report.tp) /
                                                static_cast<double>(report.tp + report.fn);
  report.precision = 100.0 * p;
  report.recall = 100.0 * r;
  report.f1 = (p + r) == 0.0 ? 0.0 : 100.0 * (2.0 * p * r / (p + r));
}

}  // namespace

TokenCountModel TokenCountModel::train(
    const std::vector<std::pair<std::string, std::string>>& docs, const LabelSpace& space) {
  if (docs.empty()) throw EvaluatorError("empty training set");

  TokenCountModel model;
  std::map<std::string, long> doc_counts;
  for (const auto& [text, label] : docs) {
    auto canonical = space.canonical(label);
    if (!canonical) throw EvaluatorError("training label outside the label space: " + label);
    ++doc_counts[*canonical];
    for (const auto& token : folded_tokens(text)) {
      ++model.token_counts_[*canonical][token];
      ++model.total_tokens_[*canonical];
      model.vocabulary_.insert(token);
    }
  }
  for (const auto& label : space.labels) {
    if (doc_counts.count(label)) model.labels_.push_back(label);
  }
  for (const auto& label : model.labels_) {
    model.log_prior_[label] = std::log(static_cast<double>(doc_counts[label]) /
                                       static_cast<double>(docs.size()));
  }
  return model;
}

double TokenCountModel::token_probability(const std::string& label,
                                          const std::string& token) const {
  auto counts_it = token_counts_.find(label);
  long count = 0;
  if (counts_it != token_counts_.end()) {
    auto it = counts_it->second.find(token);
    if (it != counts_it->second.end()) count = it->second;
  }
  long total = 0;
  auto total_it = total_tokens_.find(label);
  if (total_it != total_tokens_.end()) total = total_it->second;
  return (static_cast<double>(count) + 1.0) /
         (static_cast<double>(total) + static_cast<double>(vocabulary_.size()));
}

std::string TokenCountModel::predict(const std::string& text) const {
  if (labels_.empty()) throw EvaluatorError("model has no classes");
  std::string best = labels_.front();
  double best_score = -std::numeric_limits<double>::infinity();
  auto tokens = folded_tokens(text);
  for (const auto& label : labels_) {
    double score = log_prior_.at(label);
    for (const auto& token : tokens) {
      if (!vocabulary_.count(token)) continue;  // out-of-vocabulary tokens are ignored
      score += std::log(token_probability(label, token));
    }
    if (score > best_score) {  // ties keep the earlier label
      best_score = score;
      best = label;
    }
  }
  return best;
}

EvalReport score_classification(const std::vector<std::string>& pred,
                                const std::vector<std::string>& gold) {
  if (pred.size() != gold.size()) {
    throw EvaluatorError("prediction/gold length mismatch: " + std::to_string(pred.size()) +
                         " vs " + std::to_string(gold.size()));
  }
  EvalReport report;
  report.support = static_cast<long>(gold.size());
  long correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (fold_case(pred[i]) == fold_case(gold[i])) {
      ++correct;
    } else {
      ++report.confusion[gold[i] + " -> " + pred[i]];
    }
  }
  report.accuracy = percent(static_cast<double>(correct), static_cast<double>(gold.size()));
  report.tp = correct;
  report.fp = static_cast<long>(gold.size()) - correct;
  report.fn = report.fp;
  fill_prf(report);
  return report;
}

namespace {

template <class Instance, class KeyFn>
EvalReport score_exact_match(const std::vector<Instance>& pred, const std::vector<Instance>& gold,
                             KeyFn key_fn) {
  if (pred.size() != gold.size()) {
    throw EvaluatorError("prediction/gold length mismatch: " + std::to_string(pred.size()) +
                         " vs " + std::to_string(gold.size()));
  }
  EvalReport report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::vector<std::string> pred_keys = key_fn(pred[i]);
    std::vector<std::string> gold_keys = key_fn(gold[i]);
    report.support += static_cast<long>(gold_keys.size());
    std::multiset<std::string> unmatched(gold_keys.begin(), gold_keys.end());
    for (const auto& key : pred_keys) {
      auto it = unmatched.find(key);
      if (it != unmatched.end()) {
        unmatched.erase(it);
        ++report.tp;
      } else {
        ++report.fp;
      }
    }
    report.fn += static_cast<long>(unmatched.size());
  }
  fill_prf(report);
  return report;
}

}  // namespace

EvalReport score_spans(const std::vector<NerInstance>& pred,
                       const std::vector<NerInstance>& gold) {
  return score_exact_match(pred, gold, [](const NerInstance& inst) {
    std::vector<std::string> keys;
    for (const auto& span : inst.spans) {
      keys.push_back(std::to_string(span.start) + ":" + std::to_string(span.end) + ":" +
                     span.entity_type);
    }
    return keys;
  });
}

EvalReport score_triplets(const std::vector<AsteInstance>& pred,
                          const std::vector<AsteInstance>& gold) {
  return score_exact_match(pred, gold, [](const AsteInstance& inst) {
    std::vector<std::string> keys;
    for (const auto& t : inst.triplets) {
      std::string key;
      for (auto i : t.target) key += std::to_string(i) + ",";
      key += "|";
      for (auto i : t.opinion) key += std::to_string(i) + ",";
      key += "|";
      key += sentiment_code(t.sentiment);
      keys.push_back(std::move(key));
    }
    return keys;
  });
}

std::string format_percent(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

std::string proxy_text(const AnnotatedInstance& inst) {
  if (const auto* r = std::get_if<RelationInstance>(&inst.payload)) {
    return r->sentence + " " + r->head.surface + " " + r->tail.surface;
  }
  return inst.text();
}

std::string proxy_label(const AnnotatedInstance& inst) {
  if (const auto* c = std::get_if<ClassificationInstance>(&inst.payload)) return c->label;
  if (const auto* r = std::get_if<RelationInstance>(&inst.payload)) return r->relation;
  return "";
}

}  // namespace annotis
