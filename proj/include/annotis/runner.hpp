#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "annotis/config.hpp"
#include "annotis/evaluator.hpp"

namespace annotis {

struct RunResult {
  std::string run_dir;
  std::size_t outputs = 0;
  std::size_t dropped = 0;
  double drop_rate = 0.0;
  CostReport cost;
  // 0 = success, 2 = partial (drop rate above the configured threshold).
  int exit_code = 0;
};

// Executes the configured pipeline and writes the run directory:
//   outputs.<fmt>            emitted dataset (plus _train/_dev when split)
//   dropped.jsonl            per-item failures with reasons
//   ledger.json              usage entries (tokens only; deterministic)
//   timings.json             wall clock, latencies, timestamps (sidecar)
//   cost_report.json         samples, cost, parallelism
//   run_stats.json           completion accounting and notes
//   resolved_config.json     config snapshot with defaults and version
//   definitions.json         cached entity-type definitions (NER only)
// Everything except timings.json is byte-reproducible for a mock backend
// under a fixed seed.
RunResult run_pipeline(const RunConfig& config, std::ostream& log);

// Unlabeled inputs: plain text lines, or {"sentence","head","tail"} JSON
// lines for relation extraction.
std::vector<UnlabeledItem> read_unlabeled(const std::string& path, TaskKind kind);

// evaluate: sequence-level tasks train the proxy classifier on `train_path`
// and score it on `test_path`; token-level tasks exact-match `train_path`
// (predictions) against `test_path` (gold) instance by instance.
EvalReport evaluate_files(TaskKind kind, const std::string& train_path,
                          const std::string& test_path);

void write_eval_report(const std::string& run_dir, TaskKind kind, const EvalReport& report);

// Cost/metric comparison across run directories, one row per run:
// Approach | Num. of Samples | Cost (USD) | Time (Mins) | metrics.
std::string render_report_table(const std::vector<std::string>& run_dirs);

std::string pipeline_output_filename(DatasetFormat format, const std::string& stem = "outputs");

}  // namespace annotis
