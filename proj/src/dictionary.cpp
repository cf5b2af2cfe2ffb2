#include "annotis/dictionary.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include <httplib.h>

#include "annotis/net_guard.hpp"
#include "annotis/text.hpp"

namespace annotis {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kPairsTemplate =
    "SELECT ?headLabel ?tailLabel WHERE {\n"
    "  ?head wdt:{{property}} ?tail .\n"
    "  SERVICE wikibase:label { bd:serviceParam wikibase:language \"{{language}}\". }\n"
    "}\n"
    "LIMIT {{limit}}\n";

const char* kEntitiesTemplate =
    "SELECT DISTINCT ?itemLabel WHERE {\n"
    "  ?item wdt:P31/wdt:P279* wd:{{class}} .\n"
    "{{domain_clause}}"
    "  SERVICE wikibase:label { bd:serviceParam wikibase:language \"{{language}}\". }\n"
    "}\n"
    "LIMIT {{limit}}\n";

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

bool valid_source_id(const std::string& id) {
  if (id.size() < 2) return false;
  char first = id[0];
  bool letter = (first >= 'A' && first <= 'Z') || (first >= 'a' && first <= 'z');
  if (!letter) return false;
  for (std::size_t i = 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return false;
  }
  return true;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json entries_to_json(const std::vector<DictionaryEntry>& entries, const char* kind) {
  json doc;
  doc["kind"] = kind;
  doc["retrieved_at_ms"] = entries.empty() ? 0 : entries.front().retrieved_at_ms;
  if (std::string(kind) == "pairs") {
    json rows = json::array();
    for (const auto& e : entries) rows.push_back({e.head_label, e.tail_label});
    doc["pairs"] = rows;
  } else {
    json rows = json::array();
    for (const auto& e : entries) rows.push_back(e.entity_label);
    doc["entities"] = rows;
  }
  return doc;
}

std::vector<DictionaryEntry> entries_from_json(const json& doc, const char* kind,
                                               const DictQuery& query) {
  std::vector<DictionaryEntry> out;
  std::int64_t retrieved = doc.value("retrieved_at_ms", 0);
  if (std::string(kind) == "pairs") {
    for (const auto& row : doc.value("pairs", json::array())) {
      DictionaryEntry e;
      e.kind = DictionaryEntry::Kind::Pair;
      e.head_label = trim(row.at(0).get<std::string>());
      e.tail_label = trim(row.at(1).get<std::string>());
      e.source_id = query.source_id;
      e.retrieved_at_ms = retrieved;
      if (!e.head_label.empty() && !e.tail_label.empty()) out.push_back(std::move(e));
    }
  } else {
    for (const auto& row : doc.value("entities", json::array())) {
      DictionaryEntry e;
      e.kind = DictionaryEntry::Kind::Entity;
      e.entity_label = trim(row.get<std::string>());
      e.type_tag = query.source_id;
      e.source_id = query.source_id;
      e.retrieved_at_ms = retrieved;
      if (!e.entity_label.empty()) out.push_back(std::move(e));
    }
  }
  return out;
}

// Entities dedup case-insensitively keeping first; then the limit applies in
// source order.
std::vector<DictionaryEntry> normalize_entries(std::vector<DictionaryEntry> entries,
                                               const DictQuery& query) {
  std::vector<DictionaryEntry> out;
  std::set<std::string> seen;
  for (auto& e : entries) {
    std::string key = e.kind == DictionaryEntry::Kind::Pair
                          ? fold_case(e.head_label) + "\x1f" + fold_case(e.tail_label)
                          : fold_case(e.entity_label);
    if (!seen.insert(key).second) continue;
    out.push_back(std::move(e));
    if (static_cast<int>(out.size()) >= query.limit) break;
  }
  return out;
}

}  // namespace

DictionaryClient::DictionaryClient(DictionaryConfig config) : config_(std::move(config)) {}

std::string DictionaryClient::query_key(const char* kind, const DictQuery& query) {
  std::string key = std::string(kind) + "-" + query.source_id + "-l" +
                    std::to_string(query.limit) + "-" + query.language;
  if (!query.domain_filter.empty()) key += "-d" + query.domain_filter;
  return key;
}

void DictionaryClient::validate(const DictQuery& query) const {
  if (!valid_source_id(query.source_id)) {
    throw DictionaryError(DictionaryErrorKind::BadQuery,
                          "source id must be a letter followed by digits: " + query.source_id);
  }
  if (query.limit < 1 || query.limit > config_.hard_limit) {
    throw DictionaryError(DictionaryErrorKind::BadQuery,
                          "limit out of range: " + std::to_string(query.limit));
  }
  if (!query.domain_filter.empty() && !valid_source_id(query.domain_filter)) {
    throw DictionaryError(DictionaryErrorKind::BadQuery,
                          "domain filter must be an identifier: " + query.domain_filter);
  }
}

std::string DictionaryClient::sparql_for(const char* kind, const DictQuery& query) const {
  std::string text;
  if (!config_.sparql_dir.empty()) {
    fs::path path = fs::path(config_.sparql_dir) /
                    (std::string(kind) == "pairs" ? "pairs.rq" : "entities.rq");
    if (fs::exists(path)) text = read_file(path);
  }
  if (text.empty()) {
    text = std::string(kind) == "pairs" ? kPairsTemplate : kEntitiesTemplate;
  }
  text = replace_all(std::move(text), "{{property}}", query.source_id);
  text = replace_all(std::move(text), "{{class}}", query.source_id);
  text = replace_all(std::move(text), "{{language}}", query.language);
  text = replace_all(std::move(text), "{{limit}}", std::to_string(query.limit));
  std::string domain_clause =
      query.domain_filter.empty()
          ? ""
          : "  ?item wdt:P31/wdt:P279* wd:" + query.domain_filter + " .\n";
  text = replace_all(std::move(text), "{{domain_clause}}", domain_clause);
  return text;
}

std::vector<DictionaryEntry> DictionaryClient::fetch(const char* kind, const DictQuery& query) {
  validate(query);
  const std::string key = query_key(kind, query);

  // Per-key single flight: concurrent identical queries coalesce on a mutex.
  std::shared_ptr<std::mutex> gate;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = inflight_[key];
    if (!slot) slot = std::make_shared<std::mutex>();
    gate = slot;
  }
  std::lock_guard<std::mutex> flight(*gate);

  if (!config_.cache_dir.empty()) {
    fs::path cached = fs::path(config_.cache_dir) / (key + ".json");
    if (fs::exists(cached)) {
      return normalize_entries(entries_from_json(json::parse(read_file(cached)), kind, query),
                               query);
    }
  }

  if (!config_.fixture_dir.empty()) {
    fs::path fixture = fs::path(config_.fixture_dir) / (key + ".json");
    if (!fs::exists(fixture)) {
      // Friendly fallback: a fixture named after kind and source id alone.
      fixture = fs::path(config_.fixture_dir) / (std::string(kind) + "-" + query.source_id +
                                                 ".json");
    }
    if (!fs::exists(fixture)) {
      throw DictionaryError(DictionaryErrorKind::EndpointUnavailable,
                            "no fixture for query key " + key);
    }
    return normalize_entries(entries_from_json(json::parse(read_file(fixture)), kind, query),
                             query);
  }

  // Live request. Failures leave the cache untouched.
  std::string sparql = sparql_for(kind, query);
  std::string base;
  std::string path = "/sparql";
  {
    auto scheme_end = config_.endpoint.find("://");
    std::size_t path_start = scheme_end == std::string::npos
                                 ? config_.endpoint.find('/')
                                 : config_.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      base = config_.endpoint;
      path = "/";
    } else {
      base = config_.endpoint.substr(0, path_start);
      path = config_.endpoint.substr(path_start);
    }
  }
  net::record_dial(base);
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++network_calls_;
  }

  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers = {{"Accept", "application/sparql-results+json"},
                              {"User-Agent", config_.user_agent}};
  httplib::Params params = {{"query", sparql}, {"format", "json"}};
  auto res = client.Get(path, params, headers);
  if (!res) {
    throw DictionaryError(DictionaryErrorKind::EndpointUnavailable,
                          "cannot reach dictionary endpoint " + base);
  }
  if (res->status != 200) {
    auto kind_err = res->status == 408 || res->status == 504
                        ? DictionaryErrorKind::QueryTimeout
                        : DictionaryErrorKind::EndpointUnavailable;
    throw DictionaryError(kind_err, "dictionary endpoint returned status " +
                                        std::to_string(res->status));
  }

  std::vector<DictionaryEntry> entries;
  try {
    json doc = json::parse(res->body);
    std::int64_t retrieved = now_ms();
    for (const auto& binding : doc.at("results").at("bindings")) {
      DictionaryEntry e;
      e.source_id = query.source_id;
      e.retrieved_at_ms = retrieved;
      if (std::string(kind) == "pairs") {
        e.kind = DictionaryEntry::Kind::Pair;
        e.head_label = trim(binding.at("headLabel").at("value").get<std::string>());
        e.tail_label = trim(binding.at("tailLabel").at("value").get<std::string>());
        if (e.head_label.empty() || e.tail_label.empty()) continue;
      } else {
        e.kind = DictionaryEntry::Kind::Entity;
        e.entity_label = trim(binding.at("itemLabel").at("value").get<std::string>());
        e.type_tag = query.source_id;
        if (e.entity_label.empty()) continue;
      }
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DictionaryError(DictionaryErrorKind::EndpointUnavailable,
                          std::string("malformed dictionary response: ") + e.what());
  }

  if (!config_.cache_dir.empty()) {
    fs::create_directories(config_.cache_dir);
    fs::path final_path = fs::path(config_.cache_dir) / (key + ".json");
    fs::path tmp_path = fs::path(config_.cache_dir) / (key + ".json.tmp");
    {
      std::ofstream out(tmp_path, std::ios::binary);
      out << entries_to_json(entries, kind).dump(2) << "\n";
    }
    fs::rename(tmp_path, final_path);  // atomic publish
  }
  return normalize_entries(std::move(entries), query);
}

std::vector<DictionaryEntry> DictionaryClient::fetch_pairs(const DictQuery& query) {
  return fetch("pairs", query);
}

std::vector<DictionaryEntry> DictionaryClient::fetch_entities(const DictQuery& query) {
  return fetch("entities", query);
}

std::uint64_t DictionaryClient::network_calls() const {
  return network_calls_;
}

}  // namespace annotis
