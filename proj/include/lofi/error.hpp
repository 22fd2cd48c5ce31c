#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lofi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad pattern, timestamp format, corpus spec or CLI configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or misaligned datasets. `line` is 1-based, 0 if unknown.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptySession : public Error {
 public:
  using Error::Error;
};

class NoEligibleSpan : public Error {
 public:
  using Error::Error;
};

// A remote embedder or span backend could not be reached or answered badly.
class BackendUnavailable : public Error {
 public:
  BackendUnavailable(const std::string& what, int attempts, int last_status, int retry_after_ms)
      : Error(what), attempts_(attempts), last_status_(last_status), retry_after_ms_(retry_after_ms) {}

  int attempts() const noexcept { return attempts_; }
  // HTTP status of the last attempt, or -1 when no response was received.
  int last_status() const noexcept { return last_status_; }
  int retry_after_ms() const noexcept { return retry_after_ms_; }

 private:
  int attempts_;
  int last_status_;
  int retry_after_ms_;
};

}  // namespace lofi
