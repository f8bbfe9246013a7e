#pragma once

// Scripted stand-ins for the chat model, the search provider and the web,
// plus a loopback HTTP stub server and a scratch directory.

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "emulate/agents.hpp"
#include "emulate/page_reader.hpp"
#include "emulate/search_gateway.hpp"

namespace testkit {

using namespace emulate;

// Identifies the agent behind a request by its system prompt.
inline AgentKind agent_of(const ChatRequest& req) {
  static const PromptSet prompts = PromptSet::builtin();
  for (auto kind : kAllAgents)
    if (!req.messages.empty() && req.messages.front().content == prompts.get(kind).system_text) return kind;
  throw std::runtime_error("request does not match any built-in agent prompt");
}

inline const std::string& user_text(const ChatRequest& req) { return req.messages.at(1).content; }

// URL of the document shown to SelfContainedCheck / DetHelpful.
inline std::string document_url(const ChatRequest& req) {
  const auto& text = user_text(req);
  auto at = text.find("\nURL: ");
  if (at == std::string::npos) return {};
  at += 6;
  return text.substr(at, text.find('\n', at) - at);
}

class ScriptedChat : public ChatBackend {
 public:
  using Handler = std::function<std::string(AgentKind, const ChatRequest&)>;
  explicit ScriptedChat(Handler handler) : handler_(std::move(handler)) {}

  ChatResponse complete(const ChatRequest& req) override {
    auto kind = agent_of(req);
    {
      std::lock_guard lock(mu_);
      calls_.push_back({kind, req});
    }
    return ChatResponse{handler_(kind, req), std::nullopt};
  }

  std::size_t count(AgentKind kind) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& c : calls_) n += c.first == kind;
    return n;
  }
  std::vector<std::pair<AgentKind, ChatRequest>> calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }
  std::size_t total() const {
    std::lock_guard lock(mu_);
    return calls_.size();
  }

 private:
  Handler handler_;
  mutable std::mutex mu_;
  std::vector<std::pair<AgentKind, ChatRequest>> calls_;
};

class MapSearch : public SearchBackend {
 public:
  std::map<std::string, std::vector<RawSearchHit>> hits;
  std::map<std::string, ErrorCode> failures;

  std::vector<RawSearchHit> query(const std::string& text, int k) override {
    {
      std::lock_guard lock(mu_);
      calls_.push_back({text, k});
    }
    if (auto f = failures.find(text); f != failures.end()) throw Error(f->second, "scripted failure");
    auto it = hits.find(text);
    if (it == hits.end()) return {};
    std::vector<RawSearchHit> out = it->second;
    if (out.size() > static_cast<std::size_t>(k)) out.resize(k);
    return out;
  }

  std::vector<std::pair<std::string, int>> calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::pair<std::string, int>> calls_;
};

class MapFetcher : public PageFetcher {
 public:
  std::map<std::string, std::string> pages;  // url -> plain text body

  RawDocument fetch(const std::string& url) override {
    fetches.fetch_add(1);
    auto it = pages.find(url);
    if (it == pages.end()) throw FetchError(FetchErrorKind::Http, "HTTP 404 for " + url, 404);
    return RawDocument{url, "text/plain", it->second};
  }

  std::atomic<std::size_t> fetches{0};
};

inline std::string long_text(const std::string& seed) {
  std::string out = seed;
  while (out.size() < 120) out += " " + seed;
  return out;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("emulate-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// httplib server on an ephemeral loopback port, torn down with the object.
class StubServer {
 public:
  httplib::Server server;

  void start() {
    port_ = server.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("stub server failed to bind");
    thread_ = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~StubServer() {
    server.stop();
    if (thread_.joinable()) thread_.join();
  }
  int port() const { return port_; }
  std::string url(const std::string& path = "") const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  int port_ = 0;
  std::thread thread_;
};

inline Sleeper no_sleep() {
  return [](std::chrono::milliseconds) {};
}

}  // namespace testkit
