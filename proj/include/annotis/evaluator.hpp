#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "annotis/task.hpp"

namespace annotis {

// Dependency-free quality probe standing in for a fine-tuned encoder:
// a multinomial token-count classifier for the sequence-level tasks plus
// exact-match span and triplet scoring for the token-level ones.

class EvaluatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Multinomial estimator with add-one smoothing over case-folded unigrams.
class TokenCountModel {
 public:
  // docs: (text, label) pairs; labels must be members of the space and every
  // present class needs at least one instance.
  static TokenCountModel train(const std::vector<std::pair<std::string, std::string>>& docs,
                               const LabelSpace& space);

  // argmax class score; ties broken by label-space order. Tokens outside the
  // training vocabulary are ignored.
  std::string predict(const std::string& text) const;

  const std::vector<std::string>& labels() const { return labels_; }
  const std::set<std::string>& vocabulary() const { return vocabulary_; }
  // Smoothed P(token | label); token must belong to the vocabulary.
  double token_probability(const std::string& label, const std::string& token) const;

 private:
  std::vector<std::string> labels_;  // label-space order, present classes only
  std::map<std::string, double> log_prior_;
  std::map<std::string, std::map<std::string, long>> token_counts_;
  std::map<std::string, long> total_tokens_;
  std::set<std::string> vocabulary_;
};

struct EvalReport {
  // Percents; negative = not applicable for the task.
  double accuracy = -1.0;
  double precision = -1.0;
  double recall = -1.0;
  double f1 = -1.0;
  long support = 0;  // gold instances (or gold spans/triplets)
  long tp = 0, fp = 0, fn = 0;
  std::map<std::string, long> confusion;  // "gold -> pred" counts, mistakes only
};

EvalReport score_classification(const std::vector<std::string>& pred,
                                const std::vector<std::string>& gold);

// A predicted span counts iff (start, end, type) all match an unmatched gold
// span; micro-averaged P/R/F1.
EvalReport score_spans(const std::vector<NerInstance>& pred,
                       const std::vector<NerInstance>& gold);

// Triplets match on (target indices, opinion indices, sentiment).
EvalReport score_triplets(const std::vector<AsteInstance>& pred,
                          const std::vector<AsteInstance>& gold);

// "87.75"-style fixed two-decimal percent.
std::string format_percent(double value);

// Text the proxy classifier sees for an instance (sentence plus mention
// surfaces for relation data).
std::string proxy_text(const AnnotatedInstance& inst);
std::string proxy_label(const AnnotatedInstance& inst);

}  // namespace annotis
