#pragma once

// Domain types shared by every stage of the verifier: claims, search
// results, documents, the evidence memory bank, the query budget and the
// run trace.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace emulate {

using json = nlohmann::json;

enum class ErrorCode {
  InvalidArgument,
  Config,
  Auth,
  Transport,
  Quota,
  FixtureMiss,
  Storage,
  Fetch,
  EmptyExtraction,
  Unusable,
  Schema,
  EmptyDataset,
  LengthMismatch,
  Io,
  Internal,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

  // Auth, config, storage and replay misses abort a whole verification run.
  bool is_fatal() const noexcept {
    return code_ == ErrorCode::Auth || code_ == ErrorCode::Config ||
           code_ == ErrorCode::FixtureMiss || code_ == ErrorCode::Storage ||
           code_ == ErrorCode::InvalidArgument;
  }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Text helpers. "Characters" throughout the project are UTF-8 code points.

std::string trim(std::string_view s);
std::string trim_right(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::size_t utf8_length(std::string_view s);
// Longest prefix of `s` holding at most `max_chars` code points.
std::string utf8_truncate(std::string_view s, std::size_t max_chars);

// ---------------------------------------------------------------------------
// URLs

struct Url {
  std::string scheme;  // lowercased, "http" or "https"
  std::string host;    // lowercased
  int port = 0;        // 0 when not given explicitly
  std::string target;  // path + query, at least "/"

  int effective_port() const { return port != 0 ? port : (scheme == "https" ? 443 : 80); }
  // scheme://host[:port]
  std::string origin() const;
  std::string str() const { return origin() + target; }
};

// Accepts absolute http/https URLs with a non-empty host. Fragments are dropped.
std::optional<Url> parse_url(std::string_view text);
bool is_valid_url(std::string_view text);
// Resolves a redirect Location header against the URL that produced it.
std::optional<Url> resolve_url(const Url& base, std::string_view location);
// Dedupe key for evidence: the URL as returned, with scheme and host lowercased.
std::string url_dedupe_key(std::string_view url);

// ---------------------------------------------------------------------------
// Claims and verdicts

enum class Verdict { True, False };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

struct Claim {
  std::string id;
  std::string text;
  std::optional<Verdict> gold_label;

  // Throws InvalidArgument when the text is blank.
  static Claim make(std::string id, std::string text,
                    std::optional<Verdict> gold = std::nullopt);
};

enum class QueryOrigin { Initial, Additional };

struct SearchQuery {
  std::string text;
  QueryOrigin origin = QueryOrigin::Initial;
};

struct SearchResultMeta {
  std::string title;
  std::string url;
  std::string snippet;
  SearchQuery source_query;
};

enum class Acquisition { FetchedPage, SnippetFallback };

struct Document {
  SearchResultMeta meta;
  std::string body;
  Acquisition acquisition = Acquisition::FetchedPage;
};

// ---------------------------------------------------------------------------
// Evidence memory bank

struct EvidenceItem {
  std::string note;
  std::string source_url;
  std::string source_title;
  int added_at_step = 0;

  friend bool operator==(const EvidenceItem&, const EvidenceItem&) = default;
};

struct EvidenceAddResult;
class EvidenceSet;
EvidenceAddResult evidence_add(const EvidenceSet& set, EvidenceItem item);

inline constexpr std::string_view kNoEvidenceMarker = "NO EVIDENCE COLLECTED YET";

class EvidenceSet {
 public:
  const std::vector<EvidenceItem>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  bool contains_url(std::string_view url) const;

  friend bool operator==(const EvidenceSet&, const EvidenceSet&) = default;

 private:
  friend EvidenceAddResult evidence_add(const EvidenceSet&, EvidenceItem);
  std::vector<EvidenceItem> items_;
};

struct EvidenceAddResult {
  EvidenceSet set;
  bool duplicate = false;
};

// Appends `item` unless its source URL is already present. Throws
// InvalidArgument for an empty note or an invalid URL.
EvidenceAddResult evidence_add(const EvidenceSet& set, EvidenceItem item);

// Numbered "N. <note> (source: <url>)" lines, at most `char_budget` characters.
// Items are dropped newest-first when the block does not fit.
std::string evidence_render(const EvidenceSet& set, std::size_t char_budget);

// ---------------------------------------------------------------------------
// Budget

struct BudgetConfig {
  int max_search_queries = 4;
  int max_results_per_query = 2;
  std::string model_id = "gpt-4.1-2025-04-14";
  double temperature = 1.0;

  void validate() const;
};

enum class ConsumeStatus { Ok, Exhausted };

struct BudgetConsumeResult;
class BudgetLedger;
BudgetConsumeResult budget_consume(const BudgetLedger& ledger);

class BudgetLedger {
 public:
  explicit BudgetLedger(BudgetConfig config);
  int queries_issued() const noexcept { return issued_; }
  int remaining() const noexcept { return config_.max_search_queries - issued_; }
  const BudgetConfig& config() const noexcept { return config_; }

 private:
  friend BudgetConsumeResult budget_consume(const BudgetLedger&);
  BudgetConfig config_;
  int issued_ = 0;
};

struct BudgetConsumeResult {
  BudgetLedger ledger;
  ConsumeStatus status;
};

BudgetConsumeResult budget_consume(const BudgetLedger& ledger);

// ---------------------------------------------------------------------------
// Run trace

enum class EventKind {
  AgentCall,
  SearchCall,
  Fetch,
  ScenarioDecision,
  Deferred,
  EvidenceAdded,
  Verdict,
};

std::string_view to_string(EventKind kind);

struct TraceEvent {
  std::int64_t timestamp_ms = 0;
  EventKind kind = EventKind::AgentCall;
  json payload;
};

using Clock = std::function<std::int64_t()>;
Clock system_clock_ms();

class RunTrace {
 public:
  explicit RunTrace(Clock clock = system_clock_ms());

  // Throws Internal once a Verdict has been recorded.
  void emit(EventKind kind, json payload);

  const std::vector<TraceEvent>& events() const noexcept { return events_; }
  bool complete() const noexcept;
  std::size_t count(EventKind kind) const;
  // Number of AgentCall events for the named agent.
  std::size_t agent_calls(std::string_view agent) const;

  // One JSON object per line: {"seq","ts_ms","kind","payload"}.
  std::string to_jsonl(bool zero_timestamps = false) const;

 private:
  Clock clock_;
  std::vector<TraceEvent> events_;
};

}  // namespace emulate
