#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "annotis/config.hpp"
#include "annotis/runner.hpp"

namespace {

struct RunFlags {
  std::string config_path;
  int parallelism = 0;           // 0 = keep config value
  std::int64_t seed = -1;        // -1 = keep config value
  std::string mode;              // empty = subcommand default
  std::string templates_dir;
  std::string output_dir;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("-c,--config", flags.config_path, "JSON run configuration")->required();
  cmd->add_option("--parallelism", flags.parallelism, "override backend.parallelism");
  cmd->add_option("--seed", flags.seed, "override pipeline.seed");
  cmd->add_option("--mode", flags.mode, "override the pipeline mode");
  cmd->add_option("--templates", flags.templates_dir, "extra prompt template directory");
  cmd->add_option("--out", flags.output_dir, "override io.output_dir");
}

int execute_run(const RunFlags& flags, const std::string& default_mode) {
  annotis::RunConfig config = annotis::load_run_config(flags.config_path);
  config.pipeline.mode = flags.mode.empty() ? default_mode : flags.mode;
  if (flags.parallelism > 0) config.backend.parallelism = flags.parallelism;
  if (flags.seed >= 0) config.pipeline.seed = static_cast<std::uint64_t>(flags.seed);
  if (!flags.templates_dir.empty()) config.templates_dir = flags.templates_dir;
  if (!flags.output_dir.empty()) config.io.output_dir = flags.output_dir;

  auto result = annotis::run_pipeline(config, std::cout);
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"annotis - LLM-backed training data annotation and generation"};
  app.require_subcommand(1);

  RunFlags annotate_flags, generate_flags, dict_flags, infer_flags;
  auto* annotate_cmd =
      app.add_subcommand("annotate", "prompt-guided annotation of unlabeled data");
  add_run_flags(annotate_cmd, annotate_flags);
  auto* generate_cmd =
      app.add_subcommand("generate", "two-step prompt-guided data generation");
  add_run_flags(generate_cmd, generate_flags);
  auto* dict_cmd =
      app.add_subcommand("dict-generate", "dictionary-assisted data generation");
  add_run_flags(dict_cmd, dict_flags);
  auto* infer_cmd = app.add_subcommand("infer", "direct inference over test inputs");
  add_run_flags(infer_cmd, infer_flags);

  std::string eval_task, train_path, test_path, eval_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "train the proxy evaluator and score");
  eval_cmd->add_option("--task", eval_task, "classification|relation_extraction|ner|aste")
      ->required();
  eval_cmd->add_option("--train", train_path, "training data (or predictions for ner/aste)")
      ->required();
  eval_cmd->add_option("--test", test_path, "held-out gold data")->required();
  eval_cmd->add_option("--out", eval_out, "run directory to attach eval_report.json to");

  std::vector<std::string> report_dirs;
  auto* report_cmd = app.add_subcommand("report", "cost/metric table across run directories");
  report_cmd->add_option("run_dirs", report_dirs, "run directories")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*annotate_cmd) return execute_run(annotate_flags, "pgda");
    if (*generate_cmd) return execute_run(generate_flags, "pgdg");
    if (*dict_cmd) return execute_run(dict_flags, "dadg");
    if (*infer_cmd) return execute_run(infer_flags, "pgi");
    if (*eval_cmd) {
      auto kind = annotis::task_kind_from_string(eval_task);
      if (!kind) {
        std::cerr << "unknown task kind: " << eval_task << "\n";
        return 1;
      }
      auto report = annotis::evaluate_files(*kind, train_path, test_path);
      if (report.accuracy >= 0) {
        std::cout << "Accuracy: " << annotis::format_percent(report.accuracy) << "\n";
      }
      if (report.precision >= 0) {
        std::cout << "P: " << annotis::format_percent(report.precision)
                  << "  R: " << annotis::format_percent(report.recall)
                  << "  F1: " << annotis::format_percent(report.f1) << "\n";
      }
      std::cout << "Support: " << report.support << "\n";
      if (!eval_out.empty()) annotis::write_eval_report(eval_out, *kind, report);
      return 0;
    }
    if (*report_cmd) {
      std::cout << annotis::render_report_table(report_dirs);
      return 0;
    }
  } catch (const annotis::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
