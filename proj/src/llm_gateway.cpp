#include "emulate/llm_gateway.hpp"

namespace emulate {

namespace {
constexpr const char* kChatKind = "chat";
}

std::string_view to_string(Role role) { return role == Role::System ? "system" : "user"; }

void ChatRequest::validate() const {
  if (messages.empty()) throw Error(ErrorCode::InvalidArgument, "chat request needs at least one message");
  for (const auto& m : messages) {
    if (m.content.empty()) throw Error(ErrorCode::InvalidArgument, "chat message content must not be empty");
  }
}

json canonical_request(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", trim_right(m.content)}});
  }
  return {{"model", req.model_id}, {"temperature", req.temperature}, {"messages", messages}};
}

ReplayKey replay_key(const ChatRequest& req) {
  return ReplayKey{sha256_hex(canonical_request(req).dump())};
}

// ---------------------------------------------------------------------------

LiveChatBackend::LiveChatBackend(LiveChatConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!is_valid_url(config_.base_url))
    throw Error(ErrorCode::Config, "LLM base url is not a valid http(s) url: " + config_.base_url);
}

ChatResponse LiveChatBackend::complete(const ChatRequest& req) {
  req.validate();
  json messages = json::array();
  for (const auto& m : req.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  json body = {{"model", req.model_id}, {"messages", messages}, {"temperature", req.temperature}};

  std::string base = config_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();

  HttpRequest http;
  http.method = "POST";
  http.url = base + "/chat/completions";
  http.body = body.dump();
  http.content_type = "application/json";
  http.timeout = config_.timeout;
  if (!config_.api_key.empty()) http.headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  std::string last_failure;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 0) config_.retry.sleep(config_.retry.delay_for(attempt - 1));
    bool retryable = false;
    try {
      auto resp = transport_->send(http);
      if (resp.status == 401 || resp.status == 403)
        throw Error(ErrorCode::Auth, "LLM endpoint rejected credentials (HTTP " + std::to_string(resp.status) + ")");
      if (is_retryable_status(resp.status)) {
        retryable = true;
        last_failure = "HTTP " + std::to_string(resp.status);
      } else if (resp.status < 200 || resp.status >= 300) {
        throw Error(ErrorCode::Config, "LLM endpoint returned HTTP " + std::to_string(resp.status) + ": " +
                                           resp.body.substr(0, 300));
      } else {
        json parsed = json::parse(resp.body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty())
          throw Error(ErrorCode::Transport, "malformed chat completion payload");
        const auto& msg = parsed["choices"][0]["message"];
        ChatResponse out;
        if (msg.contains("content") && msg["content"].is_string()) out.text = msg["content"].get<std::string>();
        if (parsed.contains("usage") && parsed["usage"].is_object()) {
          const auto& u = parsed["usage"];
          out.usage = TokenUsage{u.value("prompt_tokens", 0), u.value("completion_tokens", 0)};
        }
        return out;
      }
    } catch (const TransportFailure& e) {
      retryable = true;
      last_failure = e.what();
    }
    if (!retryable || attempt >= config_.retry.max_retries)
      throw Error(ErrorCode::Transport, "chat completion failed after " + std::to_string(attempt + 1) +
                                            " attempt(s): " + last_failure);
  }
}

// ---------------------------------------------------------------------------

ChatResponse ReplayChatBackend::complete(const ChatRequest& req) {
  req.validate();
  auto key = replay_key(req);
  auto fixture = store_->get(kChatKind, key.digest);
  if (!fixture)
    throw Error(ErrorCode::FixtureMiss, "no chat fixture for key " + key.digest + " in " + store_->root().string());
  const auto& r = fixture->at("response");
  ChatResponse out;
  out.text = r.at("text").get<std::string>();
  if (r.contains("usage") && r["usage"].is_object())
    out.usage = TokenUsage{r["usage"].value("prompt_tokens", 0), r["usage"].value("completion_tokens", 0)};
  return out;
}

void record(const ChatRequest& req, const ChatResponse& resp, FixtureStore& store) {
  auto key = replay_key(req);
  json response = {{"text", resp.text}};
  if (resp.usage)
    response["usage"] = {{"prompt_tokens", resp.usage->prompt_tokens},
                         {"completion_tokens", resp.usage->completion_tokens}};
  store.put(kChatKind, key.digest,
            {{"key", key.digest}, {"request", canonical_request(req)}, {"response", response}});
}

ChatResponse RecordingChatBackend::complete(const ChatRequest& req) {
  auto resp = inner_->complete(req);
  record(req, resp, *store_);
  return resp;
}

}  // namespace emulate
