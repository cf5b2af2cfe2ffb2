#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace annotis {

// Knowledge-base client for dictionary-assisted generation: head-tail pairs
// by property id, entities by class id, with a persistent file cache and an
// offline fixture mode (the default for tests).

enum class DictionaryErrorKind { EndpointUnavailable, QueryTimeout, BadQuery };

class DictionaryError : public std::runtime_error {
 public:
  DictionaryError(DictionaryErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  DictionaryErrorKind kind() const { return kind_; }

 private:
  DictionaryErrorKind kind_;
};

struct DictionaryEntry {
  enum class Kind { Pair, Entity };
  Kind kind = Kind::Entity;
  std::string head_label;   // Pair
  std::string tail_label;   // Pair
  std::string entity_label; // Entity
  std::string type_tag;     // Entity: class the entity was queried under
  std::string source_id;    // property or class identifier, e.g. "P6"
  std::int64_t retrieved_at_ms = 0;
};

struct DictQuery {
  std::string source_id;
  int limit = 200;
  std::string language = "en";
  std::string domain_filter;  // optional class identifier
};

struct DictionaryConfig {
  std::string endpoint = "https://query.wikidata.org/sparql";
  std::string fixture_dir;  // non-empty = offline mode, never dials
  std::string cache_dir;    // empty disables the persistent cache
  std::string sparql_dir;   // external query templates; embedded defaults otherwise
  int timeout_seconds = 30;
  int hard_limit = 10000;
  std::string user_agent = "annotis/0.1 (+https://example.invalid)";
};

class DictionaryClient {
 public:
  explicit DictionaryClient(DictionaryConfig config);

  std::vector<DictionaryEntry> fetch_pairs(const DictQuery& query);
  std::vector<DictionaryEntry> fetch_entities(const DictQuery& query);

  // Live HTTP requests actually issued (cache hits and fixtures excluded).
  std::uint64_t network_calls() const;

  // Stable key used for cache and fixture file names,
  // e.g. "pairs-P6-l200-en".
  static std::string query_key(const char* kind, const DictQuery& query);

  const DictionaryConfig& config() const { return config_; }

 private:
  std::vector<DictionaryEntry> fetch(const char* kind, const DictQuery& query);
  std::string sparql_for(const char* kind, const DictQuery& query) const;
  void validate(const DictQuery& query) const;

  DictionaryConfig config_;
  std::uint64_t network_calls_ = 0;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> inflight_;  // per-key single flight
};

}  // namespace annotis
