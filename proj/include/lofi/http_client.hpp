#pragma once

#include <memory>
#include <string>

#include "json.hpp"

namespace lofi {

struct HttpClientOptions {
  int timeout_ms = 30000;
  int max_attempts = 3;
  int backoff_ms = 200;     // doubled after each failed attempt
  int max_in_flight = 32;   // concurrent requests allowed through this client
};

// JSON-over-HTTP POST client for the embedder and span backend protocols.
// Thread-safe; callers beyond max_in_flight block until a slot frees up.
class JsonPostClient {
 public:
  explicit JsonPostClient(std::string url, HttpClientOptions options = {});
  ~JsonPostClient();
  JsonPostClient(const JsonPostClient&) = delete;
  JsonPostClient& operator=(const JsonPostClient&) = delete;

  // Throws BackendUnavailable after exhausting retries, or on a non-JSON body.
  nlohmann::json post(const nlohmann::json& body) const;

  const std::string& url() const noexcept { return url_; }

 private:
  struct Impl;
  std::string url_;
  HttpClientOptions options_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lofi
