#pragma once

// Minimal HTTP plumbing shared by the chat, search and page backends. The
// transport is an interface so tests can count or script network traffic.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "emulate/core.hpp"

namespace emulate {

struct HttpRequest {
  std::string method = "GET";
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::string content_type;  // for bodies
  std::chrono::milliseconds timeout{15000};
  std::size_t max_body_bytes = 0;  // 0: unlimited
};

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string> headers;  // lowercased names
  std::string body;
  bool too_large = false;  // body exceeded max_body_bytes and was cut off

  std::string header(const std::string& name) const;
};

// Raised by transports when no HTTP response was obtained at all.
class TransportFailure : public Error {
 public:
  TransportFailure(const std::string& what, bool timeout)
      : Error(ErrorCode::Transport, what), timeout_(timeout) {}
  bool timeout() const noexcept { return timeout_; }

 private:
  bool timeout_;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Never follows redirects. Throws TransportFailure.
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

// cpp-httplib backed transport. http and https (OpenSSL).
std::shared_ptr<HttpTransport> make_http_transport();

// Counts calls before forwarding; used to prove replay paths stay offline.
class CountingTransport : public HttpTransport {
 public:
  explicit CountingTransport(std::shared_ptr<HttpTransport> inner) : inner_(std::move(inner)) {}
  HttpResponse send(const HttpRequest& request) override;
  std::size_t calls() const;

 private:
  std::shared_ptr<HttpTransport> inner_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

// Transient failures are retried `max_retries` times with delays
// base, 2*base, 4*base, ...
struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{1000};
  Sleeper sleep = real_sleeper();

  std::chrono::milliseconds delay_for(int retry_index) const {
    return base_delay * (1LL << retry_index);
  }
};

bool is_retryable_status(int status);

// Client-side limiter: at most `per_second` acquisitions per second.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second, Sleeper sleep = real_sleeper());
  void acquire();

 private:
  std::chrono::nanoseconds interval_{0};
  Sleeper sleep_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

}  // namespace emulate
