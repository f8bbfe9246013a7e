#include "emulate/http.hpp"

#include <thread>

#include <httplib.h>

namespace emulate {

std::string HttpResponse::header(const std::string& name) const {
  auto it = headers.find(to_lower_ascii(name));
  return it == headers.end() ? std::string{} : it->second;
}

namespace {

class HttplibTransport : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& request) override {
    auto url = parse_url(request.url);
    if (!url) throw Error(ErrorCode::InvalidArgument, "not an absolute http(s) url: " + request.url);

    httplib::Client client(url->origin());
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(false);

    httplib::Request req;
    req.method = request.method;
    req.path = url->target;
    for (const auto& [k, v] : request.headers) req.headers.emplace(k, v);
    if (!request.body.empty() || request.method == "POST") {
      req.body = request.body;
      if (!request.content_type.empty()) req.headers.emplace("Content-Type", request.content_type);
    }

    HttpResponse out;
    req.response_handler = [&](const httplib::Response& r) {
      out.status = r.status;
      for (const auto& [k, v] : r.headers) out.headers[to_lower_ascii(k)] = v;
      return true;
    };
    req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
      if (request.max_body_bytes != 0 && out.body.size() + len > request.max_body_bytes) {
        out.body.append(data, request.max_body_bytes - out.body.size());
        out.too_large = true;
        return false;
      }
      out.body.append(data, len);
      return true;
    };

    httplib::Response res;
    httplib::Error err = httplib::Error::Success;
    auto started = std::chrono::steady_clock::now();
    bool ok = client.send(req, res, err);
    if (out.too_large) return out;
    if (!ok) {
      auto elapsed = std::chrono::steady_clock::now() - started;
      bool timeout = err == httplib::Error::ConnectionTimeout ||
                     (err == httplib::Error::Read && elapsed >= request.timeout * 9 / 10);
      throw TransportFailure(request.method + " " + request.url + ": " + httplib::to_string(err), timeout);
    }
    out.status = res.status;
    return out;
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

HttpResponse CountingTransport::send(const HttpRequest& request) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  return inner_->send(request);
}

std::size_t CountingTransport::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

bool is_retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

RateLimiter::RateLimiter(double per_second, Sleeper sleep) : sleep_(std::move(sleep)) {
  if (per_second > 0)
    interval_ = std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / per_second));
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::duration wait{};
  {
    std::lock_guard lock(mu_);
    auto now = std::chrono::steady_clock::now();
    if (next_ < now) next_ = now;
    wait = next_ - now;
    next_ += interval_;
  }
  if (wait > std::chrono::steady_clock::duration::zero())
    sleep_(std::chrono::ceil<std::chrono::milliseconds>(wait));
}

}  // namespace emulate
