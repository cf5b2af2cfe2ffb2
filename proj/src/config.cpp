#include "annotis/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "annotis/text.hpp"

namespace annotis {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

template <class T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  return doc.at(key).get<T>();
}

}  // namespace

std::string RunConfig::resolve_path(const std::string& path) const {
  if (path.empty() || config_dir.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(config_dir) / p).lexically_normal().string();
}

RunConfig load_run_config(const std::string& path) {
  json doc = parse_file(path);
  RunConfig config;
  config.config_dir = fs::absolute(fs::path(path)).parent_path().string();

  try {
    const json& task = doc.at("task");
    auto kind = task_kind_from_string(task.at("kind").get<std::string>());
    if (!kind) throw ConfigError("task.kind", "unknown task kind");
    config.task.kind = *kind;
    config.task.labels = task.at("labels").get<std::vector<std::string>>();
    config.task.definitions =
        get_or<std::map<std::string, std::string>>(task, "definitions", {});
    config.task.shots_file = get_or<std::string>(task, "shots_file", "");
    config.task.domain = get_or<std::string>(task, "domain", "");
  } catch (const json::exception& e) {
    throw ConfigError("task", e.what());
  }

  if (doc.contains("backend")) {
    try {
      const json& backend = doc.at("backend");
      config.backend.provider = get_or<std::string>(backend, "provider", "mock");
      config.backend.mock_script = get_or<std::string>(backend, "mock_script", "");
      config.backend.endpoint =
          get_or<std::string>(backend, "endpoint", config.backend.endpoint);
      config.backend.model = get_or<std::string>(backend, "model", config.backend.model);
      config.backend.temperature = get_or<double>(backend, "temperature", -1.0);
      config.backend.max_tokens = get_or<int>(backend, "max_tokens", 0);
      config.backend.parallelism = get_or<int>(backend, "parallelism", 1);
      config.backend.context_limit = get_or<long>(backend, "context_limit", 4000);
      if (backend.contains("price")) {
        const json& price = backend.at("price");
        config.backend.price.usd_per_1k_prompt_tokens = get_or<double>(price, "prompt_per_1k", 0.0);
        config.backend.price.usd_per_1k_completion_tokens =
            get_or<double>(price, "completion_per_1k", 0.0);
        config.backend.price.model_name =
            get_or<std::string>(price, "model", config.backend.model);
      }
      if (backend.contains("retry")) {
        const json& retry = backend.at("retry");
        config.backend.retry.max_attempts = get_or<int>(retry, "max_attempts", 3);
        config.backend.retry.backoff_initial_ms = get_or<int>(retry, "backoff_initial_ms", 1000);
        config.backend.retry.backoff_multiplier = get_or<int>(retry, "backoff_multiplier", 2);
      }
    } catch (const json::exception& e) {
      throw ConfigError("backend", e.what());
    }
  }

  if (doc.contains("pipeline")) {
    try {
      const json& pipeline = doc.at("pipeline");
      config.pipeline.mode = get_or<std::string>(pipeline, "mode", "pgda");
      config.pipeline.variant = get_or<std::string>(pipeline, "variant", "");
      config.pipeline.sentence_variant = get_or<std::string>(pipeline, "sentence_variant", "");
      config.pipeline.seed = get_or<std::uint64_t>(pipeline, "seed", 0);
      config.pipeline.drop_threshold = get_or<double>(pipeline, "drop_threshold", 0.2);
      if (pipeline.contains("budget")) {
        const json& budget = pipeline.at("budget");
        config.pipeline.budget.per_label_cap = get_or<int>(budget, "per_label_cap", 200);
        config.pipeline.budget.per_prompt_count = get_or<int>(budget, "per_prompt_count", 20);
        if (budget.contains("entities_per_sentence")) {
          auto range = budget.at("entities_per_sentence").get<std::vector<int>>();
          if (range.size() != 2) {
            throw ConfigError("pipeline.budget.entities_per_sentence", "expected [min, max]");
          }
          config.pipeline.budget.entities_per_sentence_min = range[0];
          config.pipeline.budget.entities_per_sentence_max = range[1];
        }
        config.pipeline.budget.sentence_count = get_or<int>(budget, "sentence_count", 0);
      }
    } catch (const json::exception& e) {
      throw ConfigError("pipeline", e.what());
    }
  }

  if (doc.contains("dictionary")) {
    try {
      const json& dict = doc.at("dictionary");
      DictionaryBlock block;
      block.endpoint = get_or<std::string>(dict, "endpoint", block.endpoint);
      block.fixture_dir = get_or<std::string>(dict, "fixture_dir", "");
      block.cache_dir = get_or<std::string>(dict, "cache_dir", "");
      block.sparql_dir = get_or<std::string>(dict, "sparql_dir", "");
      block.source_ids = get_or<std::map<std::string, std::string>>(dict, "source_ids", {});
      block.entity_sources = get_or<std::vector<std::string>>(dict, "entity_sources", {});
      block.domain_filter = get_or<std::string>(dict, "domain_filter", "");
      block.limit = get_or<int>(dict, "limit", 0);
      config.dictionary = std::move(block);
    } catch (const json::exception& e) {
      throw ConfigError("dictionary", e.what());
    }
  }

  try {
    const json& io = doc.at("io");
    config.io.input = get_or<std::string>(io, "input", "");
    config.io.output_dir = get_or<std::string>(io, "output_dir", "runs/run");
    config.io.format = get_or<std::string>(io, "format", "");
    config.io.split = get_or<std::vector<double>>(io, "split", {});
  } catch (const json::exception& e) {
    throw ConfigError("io", e.what());
  }

  config.templates_dir = get_or<std::string>(doc, "templates_dir", "");
  return config;
}

void validate_run_config(const RunConfig& config) {
  if (config.task.labels.empty()) throw ConfigError("task.labels", "must be non-empty");
  LabelSpace space;
  space.labels = config.task.labels;
  space.definitions = config.task.definitions;
  for (const auto& violation : space.validate()) {
    throw ConfigError("task.labels", violation);
  }

  const std::string& mode = config.pipeline.mode;
  if (mode != "pgda" && mode != "pgdg" && mode != "dadg" && mode != "pgi") {
    throw ConfigError("pipeline.mode", "must be one of pgda|pgdg|dadg|pgi, got '" + mode + "'");
  }
  if (config.backend.parallelism < 1) throw ConfigError("backend.parallelism", "must be >= 1");
  if (config.backend.provider != "mock" && config.backend.provider != "live") {
    throw ConfigError("backend.provider", "must be mock or live");
  }
  if (config.backend.provider == "mock") {
    if (config.backend.mock_script.empty()) {
      throw ConfigError("backend.mock_script", "required for the mock provider");
    }
    if (!fs::exists(config.resolve_path(config.backend.mock_script))) {
      throw ConfigError("backend.mock_script",
                        "file not found: " + config.resolve_path(config.backend.mock_script));
    }
  }
  if (!config.task.shots_file.empty() &&
      !fs::exists(config.resolve_path(config.task.shots_file))) {
    throw ConfigError("task.shots_file",
                      "file not found: " + config.resolve_path(config.task.shots_file));
  }

  const auto& budget = config.pipeline.budget;
  if (budget.per_label_cap < 1) throw ConfigError("pipeline.budget.per_label_cap", "must be >= 1");
  if (budget.per_prompt_count < 1) {
    throw ConfigError("pipeline.budget.per_prompt_count", "must be >= 1");
  }
  if (budget.entities_per_sentence_min < 1 ||
      budget.entities_per_sentence_max < budget.entities_per_sentence_min) {
    throw ConfigError("pipeline.budget.entities_per_sentence", "requires 1 <= min <= max");
  }
  if (config.pipeline.drop_threshold < 0.0 || config.pipeline.drop_threshold > 1.0) {
    throw ConfigError("pipeline.drop_threshold", "must be within [0, 1]");
  }

  bool needs_input = mode == "pgda" || mode == "pgi";
  if (needs_input) {
    if (config.io.input.empty()) {
      throw ConfigError("io.input", "required for mode " + mode);
    }
    if (!fs::exists(config.resolve_path(config.io.input))) {
      throw ConfigError("io.input", "file not found: " + config.resolve_path(config.io.input));
    }
  }

  if (mode == "dadg") {
    if (!config.dictionary) {
      throw ConfigError("dictionary", "block required for mode dadg");
    }
    const auto& dict = *config.dictionary;
    bool needs_labeled_sources = config.task.kind == TaskKind::RelationExtraction ||
                                 config.task.kind == TaskKind::Ner;
    if (needs_labeled_sources && dict.source_ids.empty()) {
      throw ConfigError("dictionary.source_ids", "required for this task kind");
    }
    if (!needs_labeled_sources && dict.entity_sources.empty()) {
      throw ConfigError("dictionary.entity_sources", "required for this task kind");
    }
    if (!dict.fixture_dir.empty() && !fs::exists(config.resolve_path(dict.fixture_dir))) {
      throw ConfigError("dictionary.fixture_dir",
                        "directory not found: " + config.resolve_path(dict.fixture_dir));
    }
  }

  if (!config.io.split.empty()) {
    if (config.io.split.size() != 2) throw ConfigError("io.split", "expected [train, dev]");
    if (std::abs(config.io.split[0] + config.io.split[1] - 1.0) > 1e-9) {
      throw ConfigError("io.split", "ratios must sum to 1");
    }
  }
  if (!config.io.format.empty() && !dataset_format_from_string(config.io.format)) {
    throw ConfigError("io.format", "unknown dataset format '" + config.io.format + "'");
  }
  if (!config.templates_dir.empty() &&
      !fs::exists(config.resolve_path(config.templates_dir))) {
    throw ConfigError("templates_dir",
                      "directory not found: " + config.resolve_path(config.templates_dir));
  }
}

TaskSpec build_task_spec(const RunConfig& config) {
  TaskSpec spec;
  spec.kind = config.task.kind;
  spec.label_space.labels = config.task.labels;
  spec.label_space.definitions = config.task.definitions;
  spec.domain_hint = config.task.domain;

  if (!config.task.shots_file.empty()) {
    auto format = default_format_for(spec.kind);
    auto instances = read_dataset_file(config.resolve_path(config.task.shots_file), format);
    for (auto& inst : instances) {
      FewShotExample shot;
      shot.input_text = inst.text();
      shot.annotation = std::move(inst);
      auto violations = validate_instance(shot.annotation, spec);
      if (!violations.empty()) {
        throw ConfigError("task.shots_file", "invalid shot: " + violations.front());
      }
      spec.shots.push_back(std::move(shot));
    }
  }
  return spec;
}

DatasetFormat output_format(const RunConfig& config) {
  if (!config.io.format.empty()) {
    return *dataset_format_from_string(config.io.format);
  }
  return default_format_for(config.task.kind);
}

}  // namespace annotis
