#pragma once

// Chat-completion gateway. One interface, three backends: live HTTP
// (OpenAI-compatible /chat/completions), replay from fixtures, and a recorder
// that wraps a live backend and writes every exchange to the fixture store.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emulate/core.hpp"
#include "emulate/fixture_store.hpp"
#include "emulate/http.hpp"

namespace emulate {

enum class Role { System, User };
std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::User;
  std::string content;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;

  void validate() const;
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  std::optional<TokenUsage> usage;
};

struct ReplayKey {
  std::string digest;
  friend bool operator==(const ReplayKey&, const ReplayKey&) = default;
};

// Canonical form hashed into the replay key: trailing whitespace of each
// message is dropped, nothing else is touched.
json canonical_request(const ChatRequest& req);
ReplayKey replay_key(const ChatRequest& req);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

struct LiveChatConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::milliseconds timeout{120000};
  RetryPolicy retry;
};

class LiveChatBackend : public ChatBackend {
 public:
  LiveChatBackend(LiveChatConfig config, std::shared_ptr<HttpTransport> transport);
  ChatResponse complete(const ChatRequest& req) override;

 private:
  LiveChatConfig config_;
  std::shared_ptr<HttpTransport> transport_;
};

class ReplayChatBackend : public ChatBackend {
 public:
  explicit ReplayChatBackend(std::shared_ptr<FixtureStore> store) : store_(std::move(store)) {}
  // Throws FixtureMiss for unknown keys.
  ChatResponse complete(const ChatRequest& req) override;

 private:
  std::shared_ptr<FixtureStore> store_;
};

void record(const ChatRequest& req, const ChatResponse& resp, FixtureStore& store);

class RecordingChatBackend : public ChatBackend {
 public:
  RecordingChatBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<FixtureStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  ChatResponse complete(const ChatRequest& req) override;

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::shared_ptr<FixtureStore> store_;
};

}  // namespace emulate
