#pragma once

// Fetch a search hit's page and turn it into plain text, falling back to the
// provider snippet when the page cannot be used.

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "emulate/core.hpp"
#include "emulate/fixture_store.hpp"
#include "emulate/http.hpp"

namespace emulate {

struct ReaderConfig {
  std::chrono::milliseconds timeout{15000};
  int max_redirects = 5;
  std::size_t max_bytes = 2 * 1024 * 1024;
  std::size_t body_char_cap = 12000;
  std::size_t min_text_chars = 40;
  std::string user_agent = "emulate-verifier/1.0 (+claim verification research)";
  bool honor_robots = true;
};

struct RawDocument {
  std::string url;  // final URL after redirects
  std::string content_type;
  std::string body;
};

enum class FetchErrorKind { Timeout, Http, TooLarge, ContentType, Redirects, Robots, Transport, InvalidUrl };
std::string_view to_string(FetchErrorKind kind);

class FetchError : public Error {
 public:
  FetchError(FetchErrorKind kind, const std::string& what, int status = 0)
      : Error(ErrorCode::Fetch, what), kind_(kind), status_(status) {}
  FetchErrorKind kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }

 private:
  FetchErrorKind kind_;
  int status_;
};

class PageFetcher {
 public:
  virtual ~PageFetcher() = default;
  // Throws FetchError for every page-level failure.
  virtual RawDocument fetch(const std::string& url) = 0;
};

class LivePageFetcher : public PageFetcher {
 public:
  LivePageFetcher(ReaderConfig config, std::shared_ptr<HttpTransport> transport);
  RawDocument fetch(const std::string& url) override;

 private:
  bool robots_allow(const Url& url);

  ReaderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::mutex robots_mu_;
  std::map<std::string, std::string> robots_cache_;  // origin -> robots.txt body
};

class FixturePageFetcher : public PageFetcher {
 public:
  explicit FixturePageFetcher(std::shared_ptr<FixtureStore> store) : store_(std::move(store)) {}
  RawDocument fetch(const std::string& url) override;

 private:
  std::shared_ptr<FixtureStore> store_;
};

class RecordingPageFetcher : public PageFetcher {
 public:
  RecordingPageFetcher(std::shared_ptr<PageFetcher> inner, std::shared_ptr<FixtureStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  RawDocument fetch(const std::string& url) override;

 private:
  std::shared_ptr<PageFetcher> inner_;
  std::shared_ptr<FixtureStore> store_;
};

// True when `path` may be fetched by `user_agent` under the given robots.txt.
bool robots_allows(std::string_view robots_txt, std::string_view user_agent, std::string_view path);

bool is_html_content_type(std::string_view content_type);
bool is_readable_content_type(std::string_view content_type);

// Strips markup (scripts, styles, navigation chrome), collapses whitespace and
// keeps paragraph breaks as blank lines. Plain-text input is only normalized.
// Throws EmptyExtraction when fewer than `min_chars` characters remain.
std::string extract_text(const RawDocument& raw, std::size_t min_chars = 40);

class PageReader {
 public:
  PageReader(std::shared_ptr<PageFetcher> fetcher, ReaderConfig config)
      : fetcher_(std::move(fetcher)), config_(std::move(config)) {}

  const ReaderConfig& config() const noexcept { return config_; }

  // Fetched page, else snippet fallback. Throws Unusable when neither works;
  // `fallback_reason` receives the fetch/extraction failure, if any.
  Document acquire_document(const SearchResultMeta& result, std::string* fallback_reason = nullptr) const;

 private:
  std::shared_ptr<PageFetcher> fetcher_;
  ReaderConfig config_;
};

}  // namespace emulate
