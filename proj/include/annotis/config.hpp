#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "annotis/backend.hpp"
#include "annotis/dataset_io.hpp"
#include "annotis/dictionary.hpp"
#include "annotis/generate.hpp"
#include "annotis/task.hpp"

namespace annotis {

inline constexpr const char* kAnnotisVersion = "0.1.0";

// Config problems carry the offending field path and surface before any
// network activity.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct TaskBlock {
  TaskKind kind = TaskKind::Classification;
  std::vector<std::string> labels;
  std::map<std::string, std::string> definitions;
  std::string shots_file;  // dataset file in the task's format; optional
  std::string domain;
};

struct BackendBlock {
  std::string provider = "mock";  // mock | live
  std::string mock_script;
  std::string endpoint = "https://api.openai.com/v1/completions";
  std::string model = "text-davinci-003";
  double temperature = -1.0;  // < 0 = mode default
  int max_tokens = 0;         // 0 = mode default
  int parallelism = 1;
  long context_limit = 4000;
  PriceSchedule price;
  RetryPolicy retry;
};

struct PipelineBlock {
  std::string mode = "pgda";  // pgda | pgdg | dadg | pgi
  std::string variant;        // template id; empty = kind default
  std::string sentence_variant;
  std::uint64_t seed = 0;
  GenerationBudget budget;
  double drop_threshold = 0.2;
};

struct DictionaryBlock {
  std::string endpoint = "https://query.wikidata.org/sparql";
  std::string fixture_dir;
  std::string cache_dir;
  std::string sparql_dir;
  std::map<std::string, std::string> source_ids;  // label -> property/class id
  std::vector<std::string> entity_sources;        // classification entities / ASTE aspects
  std::string domain_filter;
  int limit = 0;  // 0 = per-label cap
};

struct IoBlock {
  std::string input;
  std::string output_dir = "runs/run";
  std::string format;          // dataset format name; empty = kind default
  std::vector<double> split;   // optional {train, dev}
};

struct RunConfig {
  TaskBlock task;
  BackendBlock backend;
  PipelineBlock pipeline;
  std::optional<DictionaryBlock> dictionary;
  IoBlock io;

  std::string config_dir;      // directory of the config file; base for relative paths
  std::string templates_dir;   // extra prompt templates

  std::string resolve_path(const std::string& path) const;
};

RunConfig load_run_config(const std::string& path);

// Field-path-first validation: files exist, mode-required blocks present,
// bounds respected. Throws ConfigError.
void validate_run_config(const RunConfig& config);

// Builds the TaskSpec, loading shots from the shots file when configured.
TaskSpec build_task_spec(const RunConfig& config);

DatasetFormat output_format(const RunConfig& config);

}  // namespace annotis
