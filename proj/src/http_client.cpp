#include "lofi/http_client.hpp"

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "lofi/error.hpp"

namespace lofi {

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("backend URL lacks a scheme: " + url);
  if (url.compare(0, scheme, "http") != 0)
    throw ConfigError("only http:// backend URLs are supported: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

struct JsonPostClient::Impl {
  ParsedUrl target;
  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;
};

JsonPostClient::JsonPostClient(std::string url, HttpClientOptions options)
    : url_(std::move(url)), options_(options), impl_(std::make_unique<Impl>()) {
  impl_->target = split_url(url_);
  if (options_.max_attempts < 1) options_.max_attempts = 1;
  if (options_.max_in_flight < 1) options_.max_in_flight = 1;
}

JsonPostClient::~JsonPostClient() = default;

nlohmann::json JsonPostClient::post(const nlohmann::json& body) const {
  {
    std::unique_lock lock(impl_->mu);
    impl_->cv.wait(lock, [&] { return impl_->in_flight < options_.max_in_flight; });
    ++impl_->in_flight;
  }
  struct Release {
    Impl* impl;
    ~Release() {
      {
        std::lock_guard lock(impl->mu);
        --impl->in_flight;
      }
      impl->cv.notify_one();
    }
  } release{impl_.get()};

  const std::string payload = body.dump();
  int last_status = -1;
  std::string last_error;
  int backoff = options_.backoff_ms;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    httplib::Client cli(impl_->target.scheme_host_port);
    const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    auto res = cli.Post(impl_->target.path, payload, "application/json");
    if (res && res->status == 200) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw BackendUnavailable(url_ + ": response is not JSON: " + e.what(), attempt, res->status, 0);
      }
    }
    if (res) {
      last_status = res->status;
      last_error = "HTTP " + std::to_string(res->status);
      // Client errors will not improve with a retry.
      if (res->status >= 400 && res->status < 500 && res->status != 429)
        throw BackendUnavailable(url_ + ": " + last_error + " " + res->body, attempt, last_status, 0);
    } else {
      last_error = httplib::to_string(res.error());
    }
    if (attempt < options_.max_attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
  }
  throw BackendUnavailable(url_ + ": " + last_error, options_.max_attempts, last_status, backoff);
}

}  // namespace lofi
