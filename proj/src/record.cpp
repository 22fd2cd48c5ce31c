#include "lofi/record.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace lofi {

namespace {

constexpr std::array<std::string_view, kLevelCount> kLevelNames = {
    "FATAL", "ERROR", "WARN", "INFO", "DEBUG", "TRACE", "OTHER"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) == y;
         });
}

}  // namespace

std::string_view to_string(LogLevel level) noexcept {
  return kLevelNames[static_cast<std::size_t>(level)];
}

LogLevel parse_level(std::string_view text) noexcept {
  for (int i = 0; i < kLevelCount - 1; ++i) {
    if (iequals(text, kLevelNames[i])) return static_cast<LogLevel>(i);
  }
  return LogLevel::Other;
}

std::optional<std::string> check_session(const LogSession& session) {
  for (std::size_t i = 0; i < session.records.size(); ++i) {
    const auto& r = session.records[i];
    if (i > 0 && r.timestamp < session.records[i - 1].timestamp)
      return "record " + std::to_string(i) + " is earlier than its predecessor";
    if (r.timestamp < session.window_start || r.timestamp >= session.window_end)
      return "record " + std::to_string(i) + " lies outside the session window";
  }
  return std::nullopt;
}

}  // namespace lofi
