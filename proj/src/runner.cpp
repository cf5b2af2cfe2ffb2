#include "annotis/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "annotis/dataset_io.hpp"
#include "annotis/generate.hpp"
#include "annotis/pgda.hpp"
#include "annotis/prompts.hpp"
#include "annotis/text.hpp"

namespace annotis {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("io", "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string mode_upper(const std::string& mode) {
  std::string out = mode;
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

int default_max_tokens(TaskKind kind, const std::string& mode) {
  if (mode == "pgdg" || mode == "dadg") return 512;
  switch (kind) {
    case TaskKind::Classification: return 16;
    case TaskKind::RelationExtraction: return 24;
    case TaskKind::Ner: return 96;
    case TaskKind::Aste: return 256;
  }
  return 64;
}

std::string default_variant(TaskKind kind, const std::string& mode) {
  if (mode == "pgda" || mode == "pgi") {
    switch (kind) {
      case TaskKind::Classification: return "pgda-sst2";
      case TaskKind::RelationExtraction: return "pgda-fewrel-1";
      case TaskKind::Ner: return "ner-type-pass";
      case TaskKind::Aste: return "pgda-aste-1";
    }
  }
  return "";
}

ordered_json ledger_to_json(const UsageLedger& ledger) {
  ordered_json doc;
  ordered_json entries = ordered_json::array();
  for (const auto& e : ledger.entries()) {
    ordered_json item;
    item["request_id"] = e.request_id;
    item["prompt_tokens"] = e.prompt_tokens;
    item["completion_tokens"] = e.completion_tokens;
    entries.push_back(std::move(item));
  }
  doc["entries"] = std::move(entries);
  doc["total_prompt_tokens"] = ledger.total_prompt_tokens();
  doc["total_completion_tokens"] = ledger.total_completion_tokens();
  return doc;
}

ordered_json timings_to_json(const UsageLedger& ledger, std::int64_t started_at,
                             std::int64_t finished_at) {
  ordered_json doc;
  doc["started_at_ms"] = started_at;
  doc["finished_at_ms"] = finished_at;
  doc["wall_ms"] = ledger.total_wall_ms();
  doc["wall_time_minutes"] = ledger.total_wall_ms() / 60000.0;
  ordered_json entries = ordered_json::array();
  for (const auto& e : ledger.entries()) {
    ordered_json item;
    item["request_id"] = e.request_id;
    item["latency_ms"] = e.latency_ms;
    item["started_at_ms"] = e.started_at_ms;
    item["finished_at_ms"] = e.finished_at_ms;
    entries.push_back(std::move(item));
  }
  doc["entries"] = std::move(entries);
  return doc;
}

ordered_json config_snapshot(const RunConfig& config) {
  ordered_json doc;
  doc["annotis_version"] = kAnnotisVersion;
  ordered_json task;
  task["kind"] = to_string(config.task.kind);
  task["labels"] = config.task.labels;
  task["definitions"] = config.task.definitions;
  task["shots_file"] = config.task.shots_file;
  task["domain"] = config.task.domain;
  doc["task"] = std::move(task);
  ordered_json backend;
  backend["provider"] = config.backend.provider;
  backend["mock_script"] = config.backend.mock_script;
  backend["endpoint"] = config.backend.endpoint;
  backend["model"] = config.backend.model;
  backend["temperature"] = config.backend.temperature;
  backend["max_tokens"] = config.backend.max_tokens;
  backend["parallelism"] = config.backend.parallelism;
  backend["context_limit"] = config.backend.context_limit;
  backend["price"] = {{"prompt_per_1k", config.backend.price.usd_per_1k_prompt_tokens},
                      {"completion_per_1k", config.backend.price.usd_per_1k_completion_tokens},
                      {"model", config.backend.price.model_name}};
  backend["retry"] = {{"max_attempts", config.backend.retry.max_attempts},
                      {"backoff_initial_ms", config.backend.retry.backoff_initial_ms},
                      {"backoff_multiplier", config.backend.retry.backoff_multiplier}};
  doc["backend"] = std::move(backend);
  ordered_json pipeline;
  pipeline["mode"] = config.pipeline.mode;
  pipeline["variant"] = config.pipeline.variant;
  pipeline["sentence_variant"] = config.pipeline.sentence_variant;
  pipeline["seed"] = config.pipeline.seed;
  pipeline["drop_threshold"] = config.pipeline.drop_threshold;
  pipeline["budget"] = {{"per_label_cap", config.pipeline.budget.per_label_cap},
                        {"per_prompt_count", config.pipeline.budget.per_prompt_count},
                        {"entities_per_sentence",
                         {config.pipeline.budget.entities_per_sentence_min,
                          config.pipeline.budget.entities_per_sentence_max}},
                        {"sentence_count", config.pipeline.budget.sentence_count}};
  doc["pipeline"] = std::move(pipeline);
  if (config.dictionary) {
    ordered_json dict;
    dict["endpoint"] = config.dictionary->endpoint;
    dict["fixture_dir"] = config.dictionary->fixture_dir;
    dict["cache_dir"] = config.dictionary->cache_dir;
    dict["sparql_dir"] = config.dictionary->sparql_dir;
    dict["source_ids"] = config.dictionary->source_ids;
    dict["entity_sources"] = config.dictionary->entity_sources;
    dict["domain_filter"] = config.dictionary->domain_filter;
    dict["limit"] = config.dictionary->limit;
    doc["dictionary"] = std::move(dict);
  }
  ordered_json io;
  io["input"] = config.io.input;
  io["output_dir"] = config.io.output_dir;
  io["format"] = config.io.format;
  io["split"] = config.io.split;
  doc["io"] = std::move(io);
  doc["templates_dir"] = config.templates_dir;
  return doc;
}

std::string two_decimals(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

}  // namespace

std::string pipeline_output_filename(DatasetFormat format, const std::string& stem) {
  switch (format) {
    case DatasetFormat::JsonlClassification:
    case DatasetFormat::JsonlRelation: return stem + ".jsonl";
    case DatasetFormat::ConllBio: return stem + ".bio";
    case DatasetFormat::AsteIndexed: return stem + ".aste";
  }
  return stem + ".txt";
}

std::vector<UnlabeledItem> read_unlabeled(const std::string& path, TaskKind kind) {
  std::string content = read_file(path);
  std::vector<UnlabeledItem> items;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (kind == TaskKind::RelationExtraction) {
      try {
        auto doc = nlohmann::json::parse(line);
        UnlabeledItem item;
        item.text = doc.at("sentence").get<std::string>();
        item.head = doc.at("head").get<std::string>();
        item.tail = doc.at("tail").get<std::string>();
        items.push_back(std::move(item));
      } catch (const nlohmann::json::exception& e) {
        throw FormatViolation(e.what(), path, line_no);
      }
    } else {
      items.push_back({line, "", ""});
    }
  }
  return items;
}

RunResult run_pipeline(const RunConfig& config, std::ostream& log) {
  validate_run_config(config);
  TaskSpec spec = build_task_spec(config);

  TemplateCatalog catalog = TemplateCatalog::builtin();
  if (!config.templates_dir.empty()) {
    catalog.load_directory(config.resolve_path(config.templates_dir));
  }

  std::shared_ptr<CompletionProvider> provider;
  if (config.backend.provider == "mock") {
    provider = MockProvider::from_script_file(config.resolve_path(config.backend.mock_script));
  } else {
    LiveProviderConfig live;
    live.endpoint = config.backend.endpoint;
    live.model = config.backend.model;
    provider = std::make_shared<LiveProvider>(live);
  }
  ClientConfig client_config;
  client_config.context_limit_tokens = config.backend.context_limit;
  client_config.retry = config.backend.retry;
  CompletionClient client(provider, client_config);

  const std::string& mode = config.pipeline.mode;
  std::string variant =
      config.pipeline.variant.empty() ? default_variant(spec.kind, mode) : config.pipeline.variant;

  auto started_at = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();

  std::vector<AnnotatedInstance> outputs;
  std::vector<DropRecord> dropped;
  std::vector<std::string> notes;
  RunStats stats;
  std::size_t span_completions = 0, sentence_completions = 0;
  DefinitionStore definitions(config.task.definitions);

  if (mode == "pgda" || mode == "pgi") {
    PipelineOptions opts;
    opts.parallelism = config.backend.parallelism;
    opts.max_tokens = config.backend.max_tokens > 0 ? config.backend.max_tokens
                                                    : default_max_tokens(spec.kind, mode);
    opts.temperature = config.backend.temperature >= 0 ? config.backend.temperature : 0.0;
    opts.provenance = mode == "pgi" ? Provenance::Pgi : Provenance::Pgda;

    auto items = read_unlabeled(config.resolve_path(config.io.input), spec.kind);
    AnnotationRun run;
    switch (spec.kind) {
      case TaskKind::Classification:
        run = annotate_classification(client, catalog, spec, variant, items, opts);
        break;
      case TaskKind::RelationExtraction:
        run = annotate_relation(client, catalog, spec, variant, items, opts);
        break;
      case TaskKind::Ner:
        run = annotate_ner(client, catalog, spec, items, opts, definitions);
        break;
      case TaskKind::Aste:
        run = annotate_aste(client, catalog, spec, variant, items, opts);
        break;
    }
    outputs = std::move(run.outputs);
    dropped = std::move(run.dropped);
    notes = std::move(run.notes);
    stats = run.stats;
  } else {
    GenOptions opts;
    opts.parallelism = config.backend.parallelism;
    opts.temperature = config.backend.temperature >= 0 ? config.backend.temperature : 0.7;
    if (config.backend.max_tokens > 0) {
      opts.span_max_tokens = config.backend.max_tokens;
      opts.sentence_max_tokens = config.backend.max_tokens;
    }
    opts.span_variant = config.pipeline.variant;
    opts.sentence_variant = config.pipeline.sentence_variant;
    opts.rng_seed = config.pipeline.seed;
    opts.provenance = mode == "dadg" ? Provenance::Dadg : Provenance::Pgdg;

    GenerationRun run;
    if (mode == "pgdg") {
      run = run_pgdg(client, catalog, spec, config.pipeline.budget, opts);
    } else {
      const auto& dict_block = *config.dictionary;
      DictionaryConfig dict_config;
      dict_config.endpoint = dict_block.endpoint;
      dict_config.fixture_dir = dict_block.fixture_dir.empty()
                                    ? ""
                                    : config.resolve_path(dict_block.fixture_dir);
      dict_config.cache_dir =
          dict_block.cache_dir.empty() ? "" : config.resolve_path(dict_block.cache_dir);
      dict_config.sparql_dir =
          dict_block.sparql_dir.empty() ? "" : config.resolve_path(dict_block.sparql_dir);
      DictionaryClient dict_client(dict_config);

      int limit = dict_block.limit > 0 ? dict_block.limit : config.pipeline.budget.per_label_cap;
      DictSeeds seeds;
      if (spec.kind == TaskKind::RelationExtraction) {
        for (const auto& label : spec.label_space.labels) {
          auto it = dict_block.source_ids.find(label);
          if (it == dict_block.source_ids.end()) continue;
          DictQuery query{it->second, limit, "en", dict_block.domain_filter};
          for (const auto& entry : dict_client.fetch_pairs(query)) {
            seeds.pairs[label].push_back({entry.head_label, entry.tail_label, label});
          }
        }
      } else if (spec.kind == TaskKind::Ner) {
        for (const auto& label : spec.label_space.labels) {
          auto it = dict_block.source_ids.find(label);
          if (it == dict_block.source_ids.end()) continue;
          DictQuery query{it->second, limit, "en", dict_block.domain_filter};
          for (const auto& entry : dict_client.fetch_entities(query)) {
            seeds.entity_pools[label].push_back(entry.entity_label);
          }
        }
      } else {
        for (const auto& source : dict_block.entity_sources) {
          DictQuery query{source, limit, "en", dict_block.domain_filter};
          for (const auto& entry : dict_client.fetch_entities(query)) {
            if (spec.kind == TaskKind::Aste) {
              seeds.aspects.push_back(entry.entity_label);
            } else {
              seeds.plain_entities.push_back(entry.entity_label);
            }
          }
        }
      }
      run = run_dadg(client, catalog, spec, seeds, config.pipeline.budget, opts);
    }
    outputs = std::move(run.instances);
    dropped = std::move(run.dropped);
    notes = std::move(run.notes);
    span_completions = run.span_completions;
    sentence_completions = run.sentence_completions;
  }

  auto finished_at = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();

  // Run directory.
  fs::path run_dir = config.resolve_path(config.io.output_dir);
  fs::create_directories(run_dir);
  DatasetFormat format = output_format(config);

  write_file(run_dir / pipeline_output_filename(format), emit_dataset(outputs, format));
  if (config.io.split.size() == 2) {
    auto [train, dev] =
        split_dataset(outputs, config.io.split[0], config.io.split[1], config.pipeline.seed);
    write_file(run_dir / pipeline_output_filename(format, "outputs_train"),
               emit_dataset(train, format));
    write_file(run_dir / pipeline_output_filename(format, "outputs_dev"),
               emit_dataset(dev, format));
  }

  {
    std::string lines;
    for (const auto& drop : dropped) {
      ordered_json record;
      record["input"] = drop.input_text;
      record["reason"] = drop.reason;
      lines += record.dump();
      lines += "\n";
    }
    write_file(run_dir / "dropped.jsonl", lines);
  }

  write_file(run_dir / "ledger.json", ledger_to_json(client.ledger()).dump(2) + "\n");
  write_file(run_dir / "timings.json",
             timings_to_json(client.ledger(), started_at, finished_at).dump(2) + "\n");

  RunResult result;
  result.run_dir = run_dir.string();
  result.outputs = outputs.size();
  result.dropped = dropped.size();
  std::size_t attempted = outputs.size() + dropped.size();
  result.drop_rate = attempted == 0 ? 0.0
                                    : static_cast<double>(dropped.size()) /
                                          static_cast<double>(attempted);

  result.cost.num_samples = static_cast<long>(outputs.size());
  result.cost.cost_usd = cost_of(client.ledger(), config.backend.price);
  result.cost.wall_time_minutes = client.ledger().total_wall_ms() / 60000.0;
  result.cost.parallelism = config.backend.parallelism;

  {
    ordered_json cost;
    cost["approach"] = mode_upper(mode) + (variant.empty() ? "" : " (" + variant + ")");
    cost["num_samples"] = result.cost.num_samples;
    cost["cost_usd"] = result.cost.cost_usd;
    cost["parallelism"] = result.cost.parallelism;
    cost["price_model"] = config.backend.price.model_name;
    write_file(run_dir / "cost_report.json", cost.dump(2) + "\n");
  }
  {
    ordered_json stats_doc;
    stats_doc["completions_issued"] =
        stats.completions_issued + span_completions + sentence_completions;
    stats_doc["definition_completions"] = stats.definition_completions;
    stats_doc["disambiguation_completions"] = stats.disambiguation_completions;
    stats_doc["span_completions"] = span_completions;
    stats_doc["sentence_completions"] = sentence_completions;
    stats_doc["outputs"] = outputs.size();
    stats_doc["dropped"] = dropped.size();
    stats_doc["notes"] = notes;
    write_file(run_dir / "run_stats.json", stats_doc.dump(2) + "\n");
  }
  write_file(run_dir / "resolved_config.json", config_snapshot(config).dump(2) + "\n");
  if (spec.kind == TaskKind::Ner && !definitions.all().empty()) {
    ordered_json defs(definitions.all());
    write_file(run_dir / "definitions.json", defs.dump(2) + "\n");
  }

  result.exit_code = result.drop_rate > config.pipeline.drop_threshold ? 2 : 0;
  log << "run " << mode_upper(mode) << ": " << result.outputs << " outputs, " << result.dropped
      << " dropped -> " << result.run_dir << "\n";
  return result;
}

// ---------------------------------------------------------------------------
// evaluate / report

EvalReport evaluate_files(TaskKind kind, const std::string& train_path,
                          const std::string& test_path) {
  DatasetFormat format = default_format_for(kind);
  auto train = read_dataset_file(train_path, format);
  auto test = read_dataset_file(test_path, format);

  if (kind == TaskKind::Classification || kind == TaskKind::RelationExtraction) {
    LabelSpace space;
    std::set<std::string> seen;
    for (const auto& inst : train) {
      std::string label = proxy_label(inst);
      if (seen.insert(fold_case(label)).second) space.labels.push_back(label);
    }
    for (const auto& inst : test) {
      std::string label = proxy_label(inst);
      if (seen.insert(fold_case(label)).second) space.labels.push_back(label);
    }
    std::vector<std::pair<std::string, std::string>> docs;
    for (const auto& inst : train) docs.emplace_back(proxy_text(inst), proxy_label(inst));
    auto model = TokenCountModel::train(docs, space);
    std::vector<std::string> pred, gold;
    for (const auto& inst : test) {
      pred.push_back(model.predict(proxy_text(inst)));
      gold.push_back(proxy_label(inst));
    }
    return score_classification(pred, gold);
  }

  if (kind == TaskKind::Ner) {
    std::vector<NerInstance> pred, gold;
    for (const auto& inst : train) pred.push_back(std::get<NerInstance>(inst.payload));
    for (const auto& inst : test) gold.push_back(std::get<NerInstance>(inst.payload));
    return score_spans(pred, gold);
  }

  std::vector<AsteInstance> pred, gold;
  for (const auto& inst : train) pred.push_back(std::get<AsteInstance>(inst.payload));
  for (const auto& inst : test) gold.push_back(std::get<AsteInstance>(inst.payload));
  return score_triplets(pred, gold);
}

void write_eval_report(const std::string& run_dir, TaskKind kind, const EvalReport& report) {
  ordered_json doc;
  doc["task"] = to_string(kind);
  if (report.accuracy >= 0) doc["accuracy"] = report.accuracy;
  if (report.precision >= 0) {
    doc["precision"] = report.precision;
    doc["recall"] = report.recall;
    doc["f1"] = report.f1;
  }
  doc["support"] = report.support;
  write_file(fs::path(run_dir) / "eval_report.json", doc.dump(2) + "\n");
}

std::string render_report_table(const std::vector<std::string>& run_dirs) {
  struct Row {
    std::string approach;
    std::string samples;
    std::string cost;
    std::string time;
    std::string accuracy;
    std::string p, r, f1;
  };
  std::vector<Row> rows;
  bool any_accuracy = false, any_prf = false;

  for (const auto& dir : run_dirs) {
    Row row;
    auto cost_doc = nlohmann::json::parse(read_file((fs::path(dir) / "cost_report.json").string()));
    row.approach = cost_doc.value("approach", dir);
    row.samples = std::to_string(cost_doc.value("num_samples", 0L));
    row.cost = two_decimals(cost_doc.value("cost_usd", 0.0));
    fs::path timings_path = fs::path(dir) / "timings.json";
    double minutes = 0.0;
    if (fs::exists(timings_path)) {
      auto timings = nlohmann::json::parse(read_file(timings_path.string()));
      minutes = timings.value("wall_time_minutes", 0.0);
    }
    row.time = two_decimals(minutes);
    fs::path eval_path = fs::path(dir) / "eval_report.json";
    if (fs::exists(eval_path)) {
      auto eval_doc = nlohmann::json::parse(read_file(eval_path.string()));
      if (eval_doc.contains("accuracy")) {
        row.accuracy = two_decimals(eval_doc["accuracy"].get<double>());
        any_accuracy = true;
      }
      if (eval_doc.contains("f1")) {
        row.p = two_decimals(eval_doc["precision"].get<double>());
        row.r = two_decimals(eval_doc["recall"].get<double>());
        row.f1 = two_decimals(eval_doc["f1"].get<double>());
        any_prf = true;
      }
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::string> headers = {"Approach", "Num. of Samples", "Cost (USD)", "Time (Mins)"};
  if (any_accuracy) headers.push_back("Accuracy");
  if (any_prf) {
    headers.push_back("P");
    headers.push_back("R");
    headers.push_back("F1");
  }

  auto cells_for = [&](const Row& row) {
    std::vector<std::string> cells = {row.approach, row.samples, row.cost, row.time};
    if (any_accuracy) cells.push_back(row.accuracy.empty() ? "-" : row.accuracy);
    if (any_prf) {
      cells.push_back(row.p.empty() ? "-" : row.p);
      cells.push_back(row.r.empty() ? "-" : row.r);
      cells.push_back(row.f1.empty() ? "-" : row.f1);
    }
    return cells;
  };

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();
  for (const auto& row : rows) {
    auto cells = cells_for(row);
    for (std::size_t c = 0; c < cells.size(); ++c) widths[c] = std::max(widths[c], cells[c].size());
  }

  auto pad = [](const std::string& text, std::size_t width) {
    return text + std::string(width - text.size(), ' ');
  };
  std::string out;
  for (std::size_t c = 0; c < headers.size(); ++c) {
    out += pad(headers[c], widths[c]);
    out += c + 1 < headers.size() ? "  " : "";
  }
  out += "\n";
  for (std::size_t c = 0; c < headers.size(); ++c) {
    out += std::string(widths[c], '-');
    out += c + 1 < headers.size() ? "  " : "";
  }
  out += "\n";
  for (const auto& row : rows) {
    auto cells = cells_for(row);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out += pad(cells[c], widths[c]);
      out += c + 1 < cells.size() ? "  " : "";
    }
    out += "\n";
  }
  return out;
}

}  // namespace annotis
