#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace annotis {

inline constexpr std::uint64_t kNoOrdinal = ~std::uint64_t{0};

enum class BackendErrorKind {
  ProviderUnavailable,  // retries exhausted
  ContextOverflow,      // prompt + max_tokens exceed the context limit
  AuthMissing,          // live provider without a credential
  MockExhausted,        // ordered mock script ran out
  MockUnmatched,        // strict rules mock with no matching rule
  Transport,            // transient transport/server fault (retryable)
};

const char* to_string(BackendErrorKind kind);

struct BackendError {
  BackendErrorKind kind = BackendErrorKind::Transport;
  std::string message;
  bool retryable = false;
};

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 256;
  double temperature = 0.0;
  std::vector<std::string> stop_sequences;  // at most 4
  int n_choices = 1;

  // Filled by the client: stable id and issue ordinal. Ordered mock scripts
  // key responses on the ordinal so results do not depend on scheduling.
  std::string request_id;
  std::uint64_t ordinal = kNoOrdinal;
};

struct CompletionResult {
  std::string text;
  long prompt_tokens = -1;      // -1 = provider did not report; estimate applies
  long completion_tokens = -1;  // same
  long latency_ms = 0;
  std::string provider_id;
};

struct CompletionOutcome {
  std::optional<CompletionResult> result;
  std::optional<BackendError> error;

  bool ok() const { return result.has_value(); }
  static CompletionOutcome success(CompletionResult r) { return {std::move(r), std::nullopt}; }
  static CompletionOutcome failure(BackendError e) { return {std::nullopt, std::move(e)}; }
};

struct PriceSchedule {
  double usd_per_1k_prompt_tokens = 0.0;
  double usd_per_1k_completion_tokens = 0.0;
  std::string model_name;
};

struct LedgerEntry {
  std::string request_id;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long latency_ms = 0;
  std::int64_t started_at_ms = 0;   // wall clock, ms since epoch
  std::int64_t finished_at_ms = 0;
};

// Append-only usage record behind the cost/time report columns. Thread-safe;
// appends are serialized so entries have a total order.
class UsageLedger {
 public:
  void append(LedgerEntry entry);
  void record_batch_wall(double wall_ms, int parallelism);

  std::vector<LedgerEntry> entries() const;
  std::size_t size() const;
  long total_prompt_tokens() const;
  long total_completion_tokens() const;
  double total_wall_ms() const;
  int max_parallelism() const;

 private:
  mutable std::mutex mu_;
  std::vector<LedgerEntry> entries_;
  double wall_ms_ = 0.0;
  int max_parallelism_ = 1;
};

struct CostReport {
  long num_samples = 0;
  double cost_usd = 0.0;
  double wall_time_minutes = 0.0;
  int parallelism = 1;
};

// ceil(bytes / 4): deterministic provider-independent heuristic. Exact
// provider-reported usage overrides it in the ledger whenever present.
long estimate_tokens(std::string_view text);

double cost_of(const std::vector<LedgerEntry>& entries, const PriceSchedule& schedule);
double cost_of(const UsageLedger& ledger, const PriceSchedule& schedule);

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual CompletionOutcome complete(const CompletionRequest& req) = 0;
  virtual std::string id() const = 0;
};

// Scripted provider for tests and offline runs. Two modes:
//  - ordered: responses consumed by request ordinal (falls back to an
//    internal counter for requests without one);
//  - rules: first regex rule matching the prompt wins.
// Unmatched/exhausted prompts are errors in strict mode, otherwise the
// default response applies.
class MockProvider : public CompletionProvider {
 public:
  struct Response {
    std::string text;
    long prompt_tokens = -1;
    long completion_tokens = -1;
  };
  struct Rule {
    std::string pattern;
    Response response;
  };

  static std::shared_ptr<MockProvider> ordered(std::vector<Response> responses,
                                               bool strict = true);
  static std::shared_ptr<MockProvider> with_rules(std::vector<Rule> rules, bool strict = true);
  static std::shared_ptr<MockProvider> from_script_file(const std::string& path);
  static std::shared_ptr<MockProvider> from_script_json(const std::string& json_text);

  CompletionOutcome complete(const CompletionRequest& req) override;
  std::string id() const override { return "mock"; }

  void set_default_response(std::string text) { default_response_ = std::move(text); }

 private:
  MockProvider() = default;
  bool ordered_mode_ = true;
  bool strict_ = true;
  std::vector<Response> responses_;
  std::vector<Rule> rules_;
  std::optional<std::string> default_response_;
  std::mutex mu_;
  std::uint64_t fallback_counter_ = 0;
};

// Adapter for test doubles defined inline.
class CallbackProvider : public CompletionProvider {
 public:
  using Fn = std::function<CompletionOutcome(const CompletionRequest&)>;
  CallbackProvider(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}
  CompletionOutcome complete(const CompletionRequest& req) override { return fn_(req); }
  std::string id() const override { return id_; }

 private:
  std::string id_;
  Fn fn_;
};

struct LiveProviderConfig {
  std::string endpoint = "https://api.openai.com/v1/completions";
  std::string model = "text-davinci-003";
  std::string api_key_env = "ANNOTIS_API_KEY";
  int timeout_seconds = 60;
};

// HTTP completion client. Request body: {model, prompt, max_tokens,
// temperature, stop, n}; reads choices[0].text plus usage token counts.
class LiveProvider : public CompletionProvider {
 public:
  explicit LiveProvider(LiveProviderConfig config);
  CompletionOutcome complete(const CompletionRequest& req) override;
  std::string id() const override { return config_.model; }

 private:
  LiveProviderConfig config_;
};

struct RetryPolicy {
  int max_attempts = 3;
  int backoff_initial_ms = 1000;
  int backoff_multiplier = 2;
};

struct ClientConfig {
  long context_limit_tokens = 4000;
  RetryPolicy retry;
};

// The request executor: validates, retries transient faults with exponential
// backoff, fills missing token counts with the estimate heuristic, and
// records usage in the ledger. Shareable across batch workers.
class CompletionClient {
 public:
  CompletionClient(std::shared_ptr<CompletionProvider> provider, ClientConfig config = {});

  CompletionOutcome complete(CompletionRequest req);

  // Index-aligned outcomes; one ledger entry per successful request, appended
  // in input order; batch wall time recorded once. A failing item never
  // aborts the batch.
  std::vector<CompletionOutcome> complete_batch(std::vector<CompletionRequest> reqs,
                                                int parallelism);

  UsageLedger& ledger() { return ledger_; }
  const UsageLedger& ledger() const { return ledger_; }
  const ClientConfig& config() const { return config_; }

 private:
  CompletionOutcome execute_with_retry(const CompletionRequest& req, LedgerEntry& entry_out);
  void assign_identity(CompletionRequest& req);

  std::shared_ptr<CompletionProvider> provider_;
  ClientConfig config_;
  UsageLedger ledger_;
  std::mutex identity_mu_;
  std::uint64_t issued_ = 0;
};

}  // namespace annotis
