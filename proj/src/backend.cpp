#include "annotis/backend.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "annotis/net_guard.hpp"
#include "annotis/text.hpp"

// httplib is pulled in only here; OpenSSL is not linked, so https endpoints
// are limited to plain-http test servers unless the build adds TLS.
#include <httplib.h>

namespace annotis {

using nlohmann::json;

const char* to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::ProviderUnavailable: return "provider_unavailable";
    case BackendErrorKind::ContextOverflow: return "context_overflow";
    case BackendErrorKind::AuthMissing: return "auth_missing";
    case BackendErrorKind::MockExhausted: return "mock_exhausted";
    case BackendErrorKind::MockUnmatched: return "mock_unmatched";
    case BackendErrorKind::Transport: return "transport";
  }
  return "unknown";
}

void UsageLedger::append(LedgerEntry entry) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.push_back(std::move(entry));
}

void UsageLedger::record_batch_wall(double wall_ms, int parallelism) {
  std::lock_guard<std::mutex> lock(mu_);
  wall_ms_ += wall_ms;
  if (parallelism > max_parallelism_) max_parallelism_ = parallelism;
}

std::vector<LedgerEntry> UsageLedger::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

std::size_t UsageLedger::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

long UsageLedger::total_prompt_tokens() const {
  std::lock_guard<std::mutex> lock(mu_);
  long total = 0;
  for (const auto& e : entries_) total += e.prompt_tokens;
  return total;
}

long UsageLedger::total_completion_tokens() const {
  std::lock_guard<std::mutex> lock(mu_);
  long total = 0;
  for (const auto& e : entries_) total += e.completion_tokens;
  return total;
}

double UsageLedger::total_wall_ms() const {
  std::lock_guard<std::mutex> lock(mu_);
  return wall_ms_;
}

int UsageLedger::max_parallelism() const {
  std::lock_guard<std::mutex> lock(mu_);
  return max_parallelism_;
}

long estimate_tokens(std::string_view text) {
  return static_cast<long>((text.size() + 3) / 4);
}

double cost_of(const std::vector<LedgerEntry>& entries, const PriceSchedule& schedule) {
  double total = 0.0;
  for (const auto& e : entries) {
    total += static_cast<double>(e.prompt_tokens) / 1000.0 * schedule.usd_per_1k_prompt_tokens;
    total += static_cast<double>(e.completion_tokens) / 1000.0 *
             schedule.usd_per_1k_completion_tokens;
  }
  return total;
}

double cost_of(const UsageLedger& ledger, const PriceSchedule& schedule) {
  return cost_of(ledger.entries(), schedule);
}

// ---------------------------------------------------------------------------
// MockProvider

std::shared_ptr<MockProvider> MockProvider::ordered(std::vector<Response> responses,
                                                    bool strict) {
  std::shared_ptr<MockProvider> p(new MockProvider());
  p->ordered_mode_ = true;
  p->strict_ = strict;
  p->responses_ = std::move(responses);
  return p;
}

std::shared_ptr<MockProvider> MockProvider::with_rules(std::vector<Rule> rules, bool strict) {
  std::shared_ptr<MockProvider> p(new MockProvider());
  p->ordered_mode_ = false;
  p->strict_ = strict;
  p->rules_ = std::move(rules);
  return p;
}

std::shared_ptr<MockProvider> MockProvider::from_script_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mock script: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_script_json(buffer.str());
}

std::shared_ptr<MockProvider> MockProvider::from_script_json(const std::string& json_text) {
  json doc = json::parse(json_text);
  std::shared_ptr<MockProvider> p(new MockProvider());
  p->strict_ = doc.value("strict", true);
  std::string mode = doc.value("mode", doc.contains("rules") ? "rules" : "ordered");
  auto parse_response = [](const json& node) {
    Response r;
    if (node.is_string()) {
      r.text = node.get<std::string>();
    } else {
      r.text = node.value("text", "");
      r.prompt_tokens = node.value("prompt_tokens", -1);
      r.completion_tokens = node.value("completion_tokens", -1);
    }
    return r;
  };
  if (mode == "rules") {
    p->ordered_mode_ = false;
    for (const auto& node : doc.value("rules", json::array())) {
      Rule rule;
      rule.pattern = node.at("pattern").get<std::string>();
      rule.response = parse_response(node.at("response"));
      p->rules_.push_back(std::move(rule));
    }
  } else {
    p->ordered_mode_ = true;
    for (const auto& node : doc.value("responses", json::array())) {
      p->responses_.push_back(parse_response(node));
    }
  }
  if (doc.contains("default")) p->default_response_ = doc["default"].get<std::string>();
  return p;
}

CompletionOutcome MockProvider::complete(const CompletionRequest& req) {
  Response resp;
  if (ordered_mode_) {
    std::uint64_t index;
    {
      std::lock_guard<std::mutex> lock(mu_);
      index = req.ordinal != kNoOrdinal ? req.ordinal : fallback_counter_++;
    }
    if (index >= responses_.size()) {
      if (default_response_) {
        resp.text = *default_response_;
      } else if (strict_) {
        return CompletionOutcome::failure({BackendErrorKind::MockExhausted,
                                           "ordered mock script exhausted at request " +
                                               std::to_string(index),
                                           false});
      }
    } else {
      resp = responses_[static_cast<std::size_t>(index)];
    }
  } else {
    bool matched = false;
    for (const auto& rule : rules_) {
      std::regex re(rule.pattern);
      if (std::regex_search(req.prompt, re)) {
        resp = rule.response;
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (default_response_) {
        resp.text = *default_response_;
      } else if (strict_) {
        return CompletionOutcome::failure(
            {BackendErrorKind::MockUnmatched, "no mock rule matches the prompt", false});
      }
    }
  }
  CompletionResult result;
  result.text = resp.text;
  result.prompt_tokens = resp.prompt_tokens;
  result.completion_tokens = resp.completion_tokens;
  result.provider_id = id();
  return CompletionOutcome::success(std::move(result));
}

// ---------------------------------------------------------------------------
// LiveProvider

namespace {

// Splits "http://host:port/path" into client target + path.
struct ParsedEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ParsedEndpoint parse_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t path_start = scheme_end == std::string::npos
                               ? url.find('/')
                               : url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

LiveProvider::LiveProvider(LiveProviderConfig config) : config_(std::move(config)) {}

CompletionOutcome LiveProvider::complete(const CompletionRequest& req) {
  const char* key = config_.api_key_env.empty() ? nullptr : std::getenv(config_.api_key_env.c_str());
  if (!key || std::string(key).empty()) {
    return CompletionOutcome::failure({BackendErrorKind::AuthMissing,
                                       "no credential in $" + config_.api_key_env, false});
  }

  json body = {
      {"model", config_.model},
      {"prompt", req.prompt},
      {"max_tokens", req.max_tokens},
      {"temperature", req.temperature},
      {"n", req.n_choices},
  };
  if (!req.stop_sequences.empty()) body["stop"] = req.stop_sequences;

  auto [base, path] = parse_endpoint(config_.endpoint);
  net::record_dial(base);

  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

  auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path, headers, body.dump(), "application/json");
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started)
                     .count();

  if (!res) {
    return CompletionOutcome::failure(
        {BackendErrorKind::Transport, "transport failure contacting " + base, true});
  }
  if (res->status == 429 || res->status >= 500) {
    return CompletionOutcome::failure({BackendErrorKind::Transport,
                                       "provider returned status " + std::to_string(res->status),
                                       true});
  }
  if (res->status != 200) {
    return CompletionOutcome::failure({BackendErrorKind::ProviderUnavailable,
                                       "provider returned status " + std::to_string(res->status),
                                       false});
  }

  try {
    json doc = json::parse(res->body);
    CompletionResult result;
    result.text = doc.at("choices").at(0).value("text", "");
    if (doc.contains("usage")) {
      result.prompt_tokens = doc["usage"].value("prompt_tokens", -1);
      result.completion_tokens = doc["usage"].value("completion_tokens", -1);
    }
    result.latency_ms = static_cast<long>(elapsed);
    result.provider_id = config_.model;
    return CompletionOutcome::success(std::move(result));
  } catch (const std::exception& e) {
    return CompletionOutcome::failure(
        {BackendErrorKind::ProviderUnavailable,
         std::string("malformed provider response: ") + e.what(), false});
  }
}

// ---------------------------------------------------------------------------
// CompletionClient

CompletionClient::CompletionClient(std::shared_ptr<CompletionProvider> provider,
                                   ClientConfig config)
    : provider_(std::move(provider)), config_(config) {}

void CompletionClient::assign_identity(CompletionRequest& req) {
  std::lock_guard<std::mutex> lock(identity_mu_);
  if (req.ordinal == kNoOrdinal) req.ordinal = issued_;
  ++issued_;
  if (req.request_id.empty()) req.request_id = "r" + std::to_string(req.ordinal);
}

CompletionOutcome CompletionClient::execute_with_retry(const CompletionRequest& req,
                                                       LedgerEntry& entry_out) {
  if (req.prompt.empty()) {
    return CompletionOutcome::failure(
        {BackendErrorKind::ProviderUnavailable, "empty prompt", false});
  }
  long estimated = estimate_tokens(req.prompt);
  if (estimated + req.max_tokens > config_.context_limit_tokens) {
    return CompletionOutcome::failure(
        {BackendErrorKind::ContextOverflow,
         "estimated " + std::to_string(estimated) + " prompt tokens + " +
             std::to_string(req.max_tokens) + " max_tokens exceed context limit " +
             std::to_string(config_.context_limit_tokens),
         false});
  }

  auto wall_now_ms = [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };

  int backoff_ms = config_.retry.backoff_initial_ms;
  CompletionOutcome outcome;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    std::int64_t started = wall_now_ms();
    auto t0 = std::chrono::steady_clock::now();
    outcome = provider_->complete(req);
    auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    std::int64_t finished = wall_now_ms();

    if (outcome.ok()) {
      auto& result = *outcome.result;
      if (result.prompt_tokens < 0) result.prompt_tokens = estimated;
      if (result.completion_tokens < 0) result.completion_tokens = estimate_tokens(result.text);
      if (result.latency_ms == 0) result.latency_ms = static_cast<long>(latency);
      entry_out = LedgerEntry{req.request_id, result.prompt_tokens, result.completion_tokens,
                              result.latency_ms, started, finished};
      return outcome;
    }
    if (!outcome.error->retryable || attempt == config_.retry.max_attempts) break;
    if (backoff_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
    backoff_ms *= config_.retry.backoff_multiplier;
  }
  if (outcome.error && outcome.error->retryable) {
    outcome.error->kind = BackendErrorKind::ProviderUnavailable;
    outcome.error->message = "retries exhausted: " + outcome.error->message;
    outcome.error->retryable = false;
  }
  return outcome;
}

CompletionOutcome CompletionClient::complete(CompletionRequest req) {
  assign_identity(req);
  LedgerEntry entry;
  auto t0 = std::chrono::steady_clock::now();
  auto outcome = execute_with_retry(req, entry);
  auto wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
  if (outcome.ok()) {
    ledger_.append(entry);
    ledger_.record_batch_wall(wall.count(), 1);
  }
  return outcome;
}

std::vector<CompletionOutcome> CompletionClient::complete_batch(
    std::vector<CompletionRequest> reqs, int parallelism) {
  if (parallelism < 1) parallelism = 1;
  const std::size_t n = reqs.size();
  for (auto& req : reqs) assign_identity(req);

  std::vector<CompletionOutcome> outcomes(n);
  std::vector<LedgerEntry> entries(n);

  auto t0 = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      outcomes[i] = execute_with_retry(reqs[i], entries[i]);
    }
  };

  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  auto wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);

  // Ledger entries land in input order regardless of completion order.
  for (std::size_t i = 0; i < n; ++i) {
    if (outcomes[i].ok()) ledger_.append(entries[i]);
  }
  ledger_.record_batch_wall(wall.count(), parallelism);
  return outcomes;
}

}  // namespace annotis
