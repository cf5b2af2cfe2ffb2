#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "annotis/task.hpp"

namespace annotis {

// Dataset emission and ingestion, bit-exact and byte-deterministic:
//   jsonl_classification  {"text": ..., "label": ...} per line
//   jsonl_relation        {"sentence": ..., "head": ..., "tail": ..., "relation": ...}
//   conll_bio             token<TAB>tag lines, blank line between sentences
//   aste_indexed          sentence####[([t_idx], [o_idx], 'POS')] per line
// UTF-8 throughout, no BOM, "\n" line endings, trailing newline at EOF.
//
// The token-level formats are canonicalizing: they store tokens, so the
// sentence read back is the space-joined token sequence. Pre-tokenized data
// (the usual convention for these formats) round-trips byte-exactly.

enum class DatasetFormat { JsonlClassification, JsonlRelation, ConllBio, AsteIndexed };

const char* to_string(DatasetFormat format);
std::optional<DatasetFormat> dataset_format_from_string(const std::string& name);
DatasetFormat default_format_for(TaskKind kind);

class FormatViolation : public std::runtime_error {
 public:
  FormatViolation(const std::string& message, std::string path = "", std::size_t line = 0)
      : std::runtime_error(path.empty() ? message
                                        : path + ":" + std::to_string(line) + ": " + message),
        path_(std::move(path)),
        line_(line) {}
  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

struct DatasetFile {
  std::string path;
  DatasetFormat format = DatasetFormat::JsonlClassification;
  std::size_t record_count = 0;
};

std::string emit_dataset(const std::vector<AnnotatedInstance>& instances, DatasetFormat format);
std::vector<AnnotatedInstance> ingest_dataset(const std::string& content, DatasetFormat format,
                                              const std::string& path_hint = "");

DatasetFile write_dataset_file(const std::string& path,
                               const std::vector<AnnotatedInstance>& instances,
                               DatasetFormat format);
std::vector<AnnotatedInstance> read_dataset_file(const std::string& path, DatasetFormat format);

// Per-token BIO tags for the sentence. Spans must be non-overlapping and
// token-aligned; the emitted sequence always passes bio_well_formed.
std::vector<std::string> spans_to_bio(const std::string& sentence,
                                      const std::vector<EntitySpan>& spans);

// Inverse over the space-joined sentence. Rejects malformed sequences
// (I- without a matching B-, bad tag syntax).
std::vector<EntitySpan> bio_to_spans(const std::vector<std::string>& tokens,
                                     const std::vector<std::string>& tags);

bool bio_well_formed(const std::vector<std::string>& tags);

// Removes exact normalized duplicates (case-fold + whitespace-collapse on the
// text, annotations compared exactly). Stable order, idempotent.
std::vector<AnnotatedInstance> dedup(const std::vector<AnnotatedInstance>& instances);

// Deterministic two-way split; ratios must sum to 1.
std::pair<std::vector<AnnotatedInstance>, std::vector<AnnotatedInstance>> split_dataset(
    const std::vector<AnnotatedInstance>& instances, double train_ratio, double dev_ratio,
    std::uint64_t seed);

}  // namespace annotis
