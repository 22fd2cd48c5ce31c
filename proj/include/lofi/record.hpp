#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lofi {

// Log4j severity ranking; a lower value is more severe.
enum class LogLevel : std::uint8_t {
  Fatal = 0,
  Error = 1,
  Warn = 2,
  Info = 3,
  Debug = 4,
  Trace = 5,
  Other = 6,
};

inline constexpr int kLevelCount = 7;

constexpr int rank(LogLevel level) noexcept { return static_cast<int>(level); }

std::string_view to_string(LogLevel level) noexcept;

// Case-insensitive; anything outside the six named levels is Other.
LogLevel parse_level(std::string_view text) noexcept;

using TimestampMs = std::int64_t;

struct LogRecord {
  TimestampMs timestamp = 0;
  LogLevel level = LogLevel::Other;
  std::string content;
  std::string raw;
  std::size_t line_no = 0;
  std::string source;

  bool operator==(const LogRecord&) const = default;
};

// Ordering used wherever records are merged back into time order.
inline bool time_order(const LogRecord& a, const LogRecord& b) noexcept {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.line_no < b.line_no;
}

struct LogSession {
  std::string session_id;
  std::vector<LogRecord> records;
  TimestampMs window_start = 0;
  TimestampMs window_end = 0;

  bool empty() const noexcept { return records.empty(); }
  std::size_t size() const noexcept { return records.size(); }
};

// Checks the ordering and window-containment invariants; returns a reason on failure.
std::optional<std::string> check_session(const LogSession& session);

}  // namespace lofi
