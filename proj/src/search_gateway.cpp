#include "emulate/search_gateway.hpp"

namespace emulate {

namespace {

constexpr const char* kSearchKind = "search";

bool is_loopback(const std::string& host) {
  return host == "localhost" || host == "[::1]" || host.rfind("127.", 0) == 0;
}

std::string string_field(const json& obj, const char* name) {
  auto it = obj.find(name);
  return it != obj.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

}  // namespace

void SearchProviderConfig::validate() const {
  auto url = parse_url(endpoint);
  if (!url) throw Error(ErrorCode::Config, "search endpoint is not a valid url: " + endpoint);
  if (url->scheme != "https" && !is_loopback(url->host))
    throw Error(ErrorCode::Config, "search endpoint must use https: " + endpoint);
}

SerperSearchBackend::SerperSearchBackend(SearchProviderConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      limiter_(config_.requests_per_second, config_.retry.sleep) {
  config_.validate();
}

std::vector<RawSearchHit> SerperSearchBackend::query(const std::string& text, int k) {
  json body = {{"q", text}, {"num", k}};
  if (!config_.default_locale.empty()) body["gl"] = config_.default_locale;

  HttpRequest http;
  http.method = "POST";
  http.url = config_.endpoint;
  http.body = body.dump();
  http.content_type = "application/json";
  http.timeout = config_.timeout;
  if (!config_.api_key.empty()) http.headers.emplace_back("X-API-KEY", config_.api_key);

  std::string last_failure;
  bool quota = false;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 0) config_.retry.sleep(config_.retry.delay_for(attempt - 1));
    limiter_.acquire();
    bool retryable = false;
    try {
      auto resp = transport_->send(http);
      if (resp.status == 401 || resp.status == 403)
        throw Error(ErrorCode::Auth, "search provider rejected credentials (HTTP " + std::to_string(resp.status) + ")");
      if (is_retryable_status(resp.status)) {
        retryable = true;
        quota = resp.status == 429;
        last_failure = "HTTP " + std::to_string(resp.status);
      } else if (resp.status < 200 || resp.status >= 300) {
        throw Error(ErrorCode::Transport, "search provider returned HTTP " + std::to_string(resp.status));
      } else {
        json parsed = json::parse(resp.body, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object())
          throw Error(ErrorCode::Transport, "search provider returned malformed JSON");
        std::vector<RawSearchHit> hits;
        if (auto organic = parsed.find("organic"); organic != parsed.end() && organic->is_array()) {
          for (const auto& item : *organic) {
            if (!item.is_object()) continue;
            hits.push_back({string_field(item, "title"), string_field(item, "link"), string_field(item, "snippet")});
          }
        }
        return hits;
      }
    } catch (const TransportFailure& e) {
      retryable = true;
      quota = false;
      last_failure = e.what();
    }
    if (!retryable || attempt >= config_.retry.max_retries) {
      throw Error(quota ? ErrorCode::Quota : ErrorCode::Transport,
                  "search failed after " + std::to_string(attempt + 1) + " attempt(s): " + last_failure);
    }
  }
}

std::string search_fixture_key(const std::string& text, int k) {
  return sha256_hex(json{{"q", text}, {"k", k}}.dump());
}

std::vector<RawSearchHit> FixtureSearchBackend::query(const std::string& text, int k) {
  auto key = search_fixture_key(text, k);
  auto fixture = store_->get(kSearchKind, key);
  if (!fixture)
    throw Error(ErrorCode::FixtureMiss, "no search fixture for query \"" + text + "\" (k=" + std::to_string(k) + ")");
  if (auto err = fixture->find("error"); err != fixture->end()) {
    auto code = err->value("code", std::string("Transport")) == "Quota" ? ErrorCode::Quota : ErrorCode::Transport;
    throw Error(code, err->value("message", std::string("recorded search failure")));
  }
  std::vector<RawSearchHit> hits;
  for (const auto& item : fixture->at("organic")) {
    hits.push_back({string_field(item, "title"), string_field(item, "link"), string_field(item, "snippet")});
  }
  return hits;
}

void record_search(const std::string& text, int k, const std::vector<RawSearchHit>& hits, FixtureStore& store) {
  json organic = json::array();
  for (const auto& h : hits) organic.push_back({{"title", h.title}, {"link", h.link}, {"snippet", h.snippet}});
  store.put(kSearchKind, search_fixture_key(text, k), {{"query", text}, {"k", k}, {"organic", organic}});
}

std::vector<RawSearchHit> RecordingSearchBackend::query(const std::string& text, int k) {
  try {
    auto hits = inner_->query(text, k);
    record_search(text, k, hits, *store_);
    return hits;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Transport || e.code() == ErrorCode::Quota) {
      store_->put(kSearchKind, search_fixture_key(text, k),
                  {{"query", text},
                   {"k", k},
                   {"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}});
    }
    throw;
  }
}

SearchResponse SearchGateway::search(const SearchQuery& query, int k) const {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (trim(query.text).empty()) throw Error(ErrorCode::InvalidArgument, "search query must not be empty");
  SearchResponse out;
  for (auto& hit : backend_->query(query.text, k)) {
    if (static_cast<int>(out.results.size()) == k) break;
    if (!is_valid_url(hit.link)) {
      out.dropped_urls.push_back(hit.link);
      continue;
    }
    out.results.push_back(SearchResultMeta{std::move(hit.title), std::move(hit.link), std::move(hit.snippet), query});
  }
  return out;
}

}  // namespace emulate
