#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "lofi/record.hpp"

namespace lofi {

inline constexpr std::string_view kDefaultLinePattern =
    R"(^(?P<timestamp>\S+ \S+)\s+(?P<level>[A-Z]+)\s+(?P<content>.*)$)";
inline constexpr std::string_view kDefaultTimestampFormat = "%Y-%m-%d %H:%M:%S";

// Timestamp formats use strftime-style directives:
//   %Y 4-digit year, %y 2-digit year (20xx), %m month, %d day,
//   %H hour, %M minute, %S second, %f fraction (1-9 digits, kept to ms),
//   %s epoch seconds, %% literal percent.
// A fraction written as `.ddd` or `,ddd` right after %S is always accepted.
// Throws ConfigError on an unknown directive.
void validate_timestamp_format(std::string_view format);

// Parses `text` fully against `format` as UTC. Returns nullopt when it does not match.
std::optional<TimestampMs> parse_timestamp(std::string_view text, std::string_view format);

// Always renders milliseconds as `.mmm` after the seconds field.
std::string format_timestamp(TimestampMs ts, std::string_view format = kDefaultTimestampFormat);

// A compiled line pattern. The regex must define the named groups timestamp, level
// and content; both `(?P<name>...)` and `(?<name>...)` spellings are accepted.
class LinePattern {
 public:
  LinePattern();  // default pattern and format
  LinePattern(std::string_view regex, std::string_view timestamp_format);

  const std::string& regex() const noexcept { return regex_; }
  const std::string& timestamp_format() const noexcept { return format_; }

  struct Fields {
    std::string timestamp;
    std::string level;
    std::string content;
  };
  std::optional<Fields> match(std::string_view line) const;

 private:
  struct Compiled;
  std::shared_ptr<const Compiled> compiled_;
  std::string regex_;
  std::string format_;
};

struct Continuation {
  std::string text;
};

struct Unparseable {
  std::string line;
};

using ParseOutcome = std::variant<LogRecord, Continuation, Unparseable>;

// `prev` only decides whether a non-matching line continues a record; it is not modified.
ParseOutcome parse_line(std::string_view line, const LinePattern& pattern,
                        const LogRecord* prev, std::size_t line_no = 0,
                        std::string_view source = {});

void append_continuation(LogRecord& prev, std::string_view text);

struct SkipReport {
  std::vector<std::pair<std::size_t, std::string>> skipped;  // (line_no, text)
  bool empty() const noexcept { return skipped.empty(); }
};

// Parses lines into records, folding continuation lines into their predecessor.
std::vector<LogRecord> parse_records(const std::vector<std::string>& lines,
                                     const LinePattern& pattern, std::string_view source = {},
                                     SkipReport* skips = nullptr, std::size_t first_line_no = 1);

// Exact content match, keeps the first occurrence.
std::vector<LogRecord> deduplicate(std::vector<LogRecord> records);

struct TimeWindow {
  TimestampMs start = 0;
  TimestampMs end = 0;  // exclusive
};

struct PreprocessOptions {
  std::string session_id;
  std::string source;
  std::optional<TimeWindow> window;
};

// Parse, deduplicate and window a block of raw lines. Throws EmptySession when nothing survives.
LogSession preprocess_session(const std::vector<std::string>& raw_lines,
                              const LinePattern& pattern, const PreprocessOptions& options = {},
                              SkipReport* skips = nullptr);

// Same as above for already parsed records (JSONL input).
LogSession make_session(std::vector<LogRecord> records, const PreprocessOptions& options = {});

// Renders a record in the default layout: "<ts> <LEVEL> <content>".
std::string serialize_line(const LogRecord& record);

}  // namespace lofi
