#pragma once

#include <memory>
#include <string>
#include <vector>

#include "emulate/core.hpp"
#include "emulate/fixture_store.hpp"
#include "emulate/http.hpp"

namespace emulate {

struct SearchProviderConfig {
  std::string endpoint = "https://google.serper.dev/search";
  std::string api_key;
  std::string default_locale;  // e.g. "us" / "en"; sent as gl/hl when set
  double requests_per_second = 5.0;
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry;

  // https only; plain http is accepted for loopback hosts (local stubs).
  void validate() const;
};

// One organic result as the provider returned it, before URL validation.
struct RawSearchHit {
  std::string title;
  std::string link;
  std::string snippet;
};

class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  // Provider-ordered hits. Throws Transport or Quota.
  virtual std::vector<RawSearchHit> query(const std::string& text, int k) = 0;
};

// POST {"q", "num"} to a serper-style endpoint and read organic[].title/link/snippet.
class SerperSearchBackend : public SearchBackend {
 public:
  SerperSearchBackend(SearchProviderConfig config, std::shared_ptr<HttpTransport> transport);
  std::vector<RawSearchHit> query(const std::string& text, int k) override;

 private:
  SearchProviderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  RateLimiter limiter_;
};

std::string search_fixture_key(const std::string& text, int k);

// Fixtures are keyed by (query text, k). A recorded provider failure replays
// as the same failure.
class FixtureSearchBackend : public SearchBackend {
 public:
  explicit FixtureSearchBackend(std::shared_ptr<FixtureStore> store) : store_(std::move(store)) {}
  std::vector<RawSearchHit> query(const std::string& text, int k) override;

 private:
  std::shared_ptr<FixtureStore> store_;
};

void record_search(const std::string& text, int k, const std::vector<RawSearchHit>& hits, FixtureStore& store);

class RecordingSearchBackend : public SearchBackend {
 public:
  RecordingSearchBackend(std::shared_ptr<SearchBackend> inner, std::shared_ptr<FixtureStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  std::vector<RawSearchHit> query(const std::string& text, int k) override;

 private:
  std::shared_ptr<SearchBackend> inner_;
  std::shared_ptr<FixtureStore> store_;
};

struct SearchResponse {
  std::vector<SearchResultMeta> results;
  std::vector<std::string> dropped_urls;  // hits rejected for an unusable URL
};

class SearchGateway {
 public:
  explicit SearchGateway(std::shared_ptr<SearchBackend> backend) : backend_(std::move(backend)) {}

  // At most k results in provider order, every one with a valid http(s) URL.
  SearchResponse search(const SearchQuery& query, int k) const;

 private:
  std::shared_ptr<SearchBackend> backend_;
};

}  // namespace emulate
