#include "emulate/core.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace emulate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Auth: return "Auth";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::Quota: return "Quota";
    case ErrorCode::FixtureMiss: return "FixtureMiss";
    case ErrorCode::Storage: return "Storage";
    case ErrorCode::Fetch: return "Fetch";
    case ErrorCode::EmptyExtraction: return "EmptyExtraction";
    case ErrorCode::Unusable: return "Unusable";
    case ErrorCode::Schema: return "Schema";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Text

namespace {
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }
}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string trim_right(std::string_view s) {
  std::size_t e = s.size();
  while (e > 0 && is_space(s[e - 1])) --e;
  return std::string(s.substr(0, e));
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return !is_continuation(static_cast<unsigned char>(c)); }));
}

std::string utf8_truncate(std::string_view s, std::size_t max_chars) {
  std::size_t chars = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!is_continuation(static_cast<unsigned char>(s[i]))) {
      if (chars == max_chars) return std::string(s.substr(0, i));
      ++chars;
    }
  }
  return std::string(s);
}

// ---------------------------------------------------------------------------
// URLs

std::string Url::origin() const {
  std::string out = scheme + "://" + host;
  if (port != 0) out += ":" + std::to_string(port);
  return out;
}

namespace {

struct RawUrlParts {
  std::string_view scheme;
  std::string_view authority;
  std::string_view rest;  // path + query + fragment, as given
};

std::optional<RawUrlParts> split_url(std::string_view text) {
  auto sep = text.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  RawUrlParts parts;
  parts.scheme = text.substr(0, sep);
  auto after = text.substr(sep + 3);
  auto end = after.find_first_of("/?#");
  parts.authority = after.substr(0, end);
  parts.rest = end == std::string_view::npos ? std::string_view{} : after.substr(end);
  return parts;
}

}  // namespace

std::optional<Url> parse_url(std::string_view text) {
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u == 0x7F) return std::nullopt;
  }
  auto parts = split_url(text);
  if (!parts) return std::nullopt;

  Url url;
  url.scheme = to_lower_ascii(parts->scheme);
  if (url.scheme != "http" && url.scheme != "https") return std::nullopt;

  std::string_view authority = parts->authority;
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  if (authority.empty()) return std::nullopt;

  std::string_view host = authority;
  std::string_view port;
  if (authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(0, close + 1);
    auto tail = authority.substr(close + 1);
    if (!tail.empty()) {
      if (tail.front() != ':') return std::nullopt;
      port = tail.substr(1);
    }
  } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }
  if (host.empty()) return std::nullopt;
  for (char c : host) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' ||
          c == '[' || c == ']' || c == ':' || static_cast<unsigned char>(c) >= 0x80))
      return std::nullopt;
  }
  url.host = to_lower_ascii(host);
  if (!port.empty()) {
    if (port.size() > 5 || !std::all_of(port.begin(), port.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return std::nullopt;
    int value = std::stoi(std::string(port));
    if (value <= 0 || value > 65535) return std::nullopt;
    url.port = value;
  }

  std::string_view rest = parts->rest;
  if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  url.target = std::string(rest);
  if (url.target.empty() || url.target.front() != '/') url.target.insert(0, "/");
  return url;
}

bool is_valid_url(std::string_view text) { return parse_url(text).has_value(); }

std::optional<Url> resolve_url(const Url& base, std::string_view location) {
  std::string loc = trim(location);
  if (loc.empty()) return std::nullopt;
  if (loc.find("://") != std::string::npos) return parse_url(loc);
  if (loc.rfind("//", 0) == 0) return parse_url(base.scheme + ":" + loc);
  if (loc.front() == '/') return parse_url(base.origin() + loc);
  std::string dir = base.target.substr(0, base.target.find('?'));
  dir = dir.substr(0, dir.rfind('/') + 1);
  return parse_url(base.origin() + dir + loc);
}

std::string url_dedupe_key(std::string_view url) {
  auto parts = split_url(url);
  if (!parts) return std::string(url);
  return to_lower_ascii(parts->scheme) + "://" + to_lower_ascii(parts->authority) +
         std::string(parts->rest);
}

// ---------------------------------------------------------------------------
// Claims

std::string_view to_string(Verdict v) { return v == Verdict::True ? "True" : "False"; }

std::optional<Verdict> parse_verdict(std::string_view text) {
  auto lower = to_lower_ascii(trim(text));
  if (lower == "true") return Verdict::True;
  if (lower == "false") return Verdict::False;
  return std::nullopt;
}

Claim Claim::make(std::string id, std::string text, std::optional<Verdict> gold) {
  if (trim(text).empty()) throw Error(ErrorCode::InvalidArgument, "claim text must not be empty");
  return Claim{std::move(id), std::move(text), gold};
}

// ---------------------------------------------------------------------------
// Evidence

bool EvidenceSet::contains_url(std::string_view url) const {
  auto key = url_dedupe_key(url);
  return std::any_of(items_.begin(), items_.end(),
                     [&](const EvidenceItem& it) { return url_dedupe_key(it.source_url) == key; });
}

EvidenceAddResult evidence_add(const EvidenceSet& set, EvidenceItem item) {
  if (trim(item.note).empty())
    throw Error(ErrorCode::InvalidArgument, "evidence note must not be empty");
  if (!is_valid_url(item.source_url))
    throw Error(ErrorCode::InvalidArgument, "evidence source url is invalid: " + item.source_url);
  if (item.added_at_step < 0)
    throw Error(ErrorCode::InvalidArgument, "evidence step must be non-negative");
  if (set.contains_url(item.source_url)) return {set, true};
  EvidenceAddResult out{set, false};
  out.set.items_.push_back(std::move(item));
  return out;
}

std::string evidence_render(const EvidenceSet& set, std::size_t char_budget) {
  if (char_budget == 0) throw Error(ErrorCode::InvalidArgument, "char_budget must be positive");
  if (set.empty()) return utf8_truncate(kNoEvidenceMarker, char_budget);

  std::string out;
  std::size_t used = 0;
  const auto& items = set.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::string line = std::to_string(i + 1) + ". " + items[i].note + " (source: " +
                       items[i].source_url + ")";
    std::size_t cost = utf8_length(line) + (i == 0 ? 0 : 1);
    if (used + cost > char_budget) {
      // Not even the first item fits: keep its head.
      if (i == 0) return utf8_truncate(line, char_budget);
      break;
    }
    if (i != 0) out += '\n';
    out += line;
    used += cost;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Budget

void BudgetConfig::validate() const {
  if (max_search_queries < 1)
    throw Error(ErrorCode::InvalidArgument, "max_search_queries must be >= 1");
  if (max_results_per_query < 1)
    throw Error(ErrorCode::InvalidArgument, "max_results_per_query must be >= 1");
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
}

BudgetLedger::BudgetLedger(BudgetConfig config) : config_(std::move(config)) { config_.validate(); }

BudgetConsumeResult budget_consume(const BudgetLedger& ledger) {
  BudgetConsumeResult out{ledger, ConsumeStatus::Exhausted};
  if (ledger.issued_ < ledger.config_.max_search_queries) {
    ++out.ledger.issued_;
    out.status = ConsumeStatus::Ok;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::AgentCall: return "AgentCall";
    case EventKind::SearchCall: return "SearchCall";
    case EventKind::Fetch: return "Fetch";
    case EventKind::ScenarioDecision: return "ScenarioDecision";
    case EventKind::Deferred: return "Deferred";
    case EventKind::EvidenceAdded: return "EvidenceAdded";
    case EventKind::Verdict: return "Verdict";
  }
  return "Unknown";
}

Clock system_clock_ms() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

RunTrace::RunTrace(Clock clock) : clock_(std::move(clock)) {}

void RunTrace::emit(EventKind kind, json payload) {
  if (complete()) throw Error(ErrorCode::Internal, "trace already holds a verdict");
  events_.push_back(TraceEvent{clock_ ? clock_() : 0, kind, std::move(payload)});
}

bool RunTrace::complete() const noexcept {
  return !events_.empty() && events_.back().kind == EventKind::Verdict;
}

std::size_t RunTrace::count(EventKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      events_.begin(), events_.end(), [&](const TraceEvent& e) { return e.kind == kind; }));
}

std::size_t RunTrace::agent_calls(std::string_view agent) const {
  return static_cast<std::size_t>(std::count_if(events_.begin(), events_.end(), [&](const TraceEvent& e) {
    return e.kind == EventKind::AgentCall && e.payload.value("agent", std::string{}) == agent;
  }));
}

std::string RunTrace::to_jsonl(bool zero_timestamps) const {
  std::ostringstream out;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    json line = {{"seq", i},
                 {"ts_ms", zero_timestamps ? 0 : e.timestamp_ms},
                 {"kind", to_string(e.kind)},
                 {"payload", e.payload}};
    out << line.dump() << '\n';
  }
  return out.str();
}

}  // namespace emulate
