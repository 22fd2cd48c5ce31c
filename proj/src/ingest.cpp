#include "lofi/ingest.hpp"

#include <algorithm>
#include <boost/regex.hpp>
#include <chrono>
#include <unordered_set>

#include "lofi/error.hpp"

namespace lofi {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string_view strip_eol(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Reads between min_digits and max_digits decimal digits.
bool read_int(std::string_view text, std::size_t& pos, int min_digits, int max_digits,
              std::int64_t& out) {
  std::int64_t v = 0;
  int n = 0;
  while (pos < text.size() && n < max_digits && is_digit(text[pos])) {
    v = v * 10 + (text[pos] - '0');
    ++pos;
    ++n;
  }
  if (n < min_digits) return false;
  out = v;
  return true;
}

bool read_fraction_ms(std::string_view text, std::size_t& pos, std::int64_t& ms) {
  std::size_t start = pos;
  std::int64_t v = 0;
  int n = 0;
  while (pos < text.size() && n < 9 && is_digit(text[pos])) {
    if (n < 3) v = v * 10 + (text[pos] - '0');
    ++pos;
    ++n;
  }
  if (pos == start) return false;
  for (int k = n; k < 3; ++k) v *= 10;
  ms = v;
  return true;
}

constexpr std::string_view kDirectives = "YymdHMSfs%";

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string pad(std::int64_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

std::string translate_named_groups(std::string_view regex) {
  std::string out;
  out.reserve(regex.size());
  for (std::size_t i = 0; i < regex.size(); ++i) {
    if (regex.substr(i, 4) == "(?P<") {
      out += "(?<";
      i += 3;
    } else {
      out += regex[i];
    }
  }
  return out;
}

}  // namespace

void validate_timestamp_format(std::string_view format) {
  for (std::size_t i = 0; i < format.size(); ++i) {
    if (format[i] != '%') continue;
    if (i + 1 >= format.size() || kDirectives.find(format[i + 1]) == std::string_view::npos)
      throw ConfigError("unsupported timestamp directive in format '" + std::string(format) + "'");
    ++i;
  }
}

std::optional<TimestampMs> parse_timestamp(std::string_view text, std::string_view format) {
  std::int64_t year = 1970, month = 1, day = 1, hour = 0, minute = 0, second = 0, ms = 0;
  std::optional<std::int64_t> epoch_s;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < format.size(); ++f) {
    if (format[f] != '%') {
      if (pos >= text.size() || text[pos] != format[f]) return std::nullopt;
      ++pos;
      continue;
    }
    if (++f >= format.size()) return std::nullopt;
    std::int64_t v = 0;
    switch (format[f]) {
      case 'Y':
        if (!read_int(text, pos, 4, 4, year)) return std::nullopt;
        break;
      case 'y':
        if (!read_int(text, pos, 2, 2, v)) return std::nullopt;
        year = 2000 + v;
        break;
      case 'm':
        if (!read_int(text, pos, 1, 2, month)) return std::nullopt;
        break;
      case 'd':
        if (!read_int(text, pos, 1, 2, day)) return std::nullopt;
        break;
      case 'H':
        if (!read_int(text, pos, 1, 2, hour)) return std::nullopt;
        break;
      case 'M':
        if (!read_int(text, pos, 1, 2, minute)) return std::nullopt;
        break;
      case 'S': {
        if (!read_int(text, pos, 1, 2, second)) return std::nullopt;
        const bool explicit_fraction =
            f + 1 < format.size() && (format[f + 1] == '.' || format[f + 1] == ',');
        if (!explicit_fraction && pos + 1 < text.size() &&
            (text[pos] == '.' || text[pos] == ',') && is_digit(text[pos + 1])) {
          ++pos;
          read_fraction_ms(text, pos, ms);
        }
        break;
      }
      case 'f':
        if (!read_fraction_ms(text, pos, ms)) return std::nullopt;
        break;
      case 's':
        if (!read_int(text, pos, 1, 18, v)) return std::nullopt;
        epoch_s = v;
        break;
      case '%':
        if (pos >= text.size() || text[pos] != '%') return std::nullopt;
        ++pos;
        break;
      default:
        return std::nullopt;
    }
  }
  if (pos != text.size()) return std::nullopt;
  if (epoch_s) return *epoch_s * 1000 + ms;

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{static_cast<int>(year)},
                           std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return ((static_cast<std::int64_t>(days) * 24 + hour) * 60 + minute) * 60000 + second * 1000 + ms;
}

std::string format_timestamp(TimestampMs ts, std::string_view format) {
  using namespace std::chrono;
  const std::int64_t day_ms = 86400000;
  const std::int64_t days = floor_div(ts, day_ms);
  std::int64_t rem = ts - days * day_ms;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  const std::int64_t hour = rem / 3600000;
  rem %= 3600000;
  const std::int64_t minute = rem / 60000;
  rem %= 60000;
  const std::int64_t second = rem / 1000;
  const std::int64_t ms = rem % 1000;

  const bool has_fraction = format.find("%f") != std::string_view::npos;
  std::string out;
  for (std::size_t f = 0; f < format.size(); ++f) {
    if (format[f] != '%' || f + 1 >= format.size()) {
      out += format[f];
      continue;
    }
    switch (format[++f]) {
      case 'Y': out += pad(static_cast<int>(ymd.year()), 4); break;
      case 'y': out += pad(static_cast<int>(ymd.year()) % 100, 2); break;
      case 'm': out += pad(static_cast<unsigned>(ymd.month()), 2); break;
      case 'd': out += pad(static_cast<unsigned>(ymd.day()), 2); break;
      case 'H': out += pad(hour, 2); break;
      case 'M': out += pad(minute, 2); break;
      case 'S':
        out += pad(second, 2);
        if (!has_fraction) out += "." + pad(ms, 3);
        break;
      case 'f': out += pad(ms, 3); break;
      case 's': out += std::to_string(floor_div(ts, 1000)); break;
      case '%': out += '%'; break;
      default: out += '%'; out += format[f];
    }
  }
  return out;
}

struct LinePattern::Compiled {
  boost::regex re;
};

LinePattern::LinePattern() : LinePattern(kDefaultLinePattern, kDefaultTimestampFormat) {}

LinePattern::LinePattern(std::string_view regex, std::string_view timestamp_format)
    : regex_(regex), format_(timestamp_format) {
  validate_timestamp_format(format_);
  const std::string translated = translate_named_groups(regex);
  auto compiled = std::make_shared<Compiled>();
  try {
    compiled->re = boost::regex(translated, boost::regex::perl);
  } catch (const boost::regex_error& e) {
    throw ConfigError("invalid line pattern: " + std::string(e.what()));
  }
  for (const char* name : {"timestamp", "level", "content"}) {
    if (translated.find(std::string("(?<") + name + ">") == std::string::npos &&
        translated.find(std::string("(?'") + name + "'") == std::string::npos)
      throw ConfigError(std::string("line pattern lacks named group '") + name + "'");
  }
  compiled_ = std::move(compiled);
}

std::optional<LinePattern::Fields> LinePattern::match(std::string_view line) const {
  boost::match_results<std::string_view::const_iterator> m;
  if (!boost::regex_match(line.begin(), line.end(), m, compiled_->re)) return std::nullopt;
  return Fields{m["timestamp"].str(), m["level"].str(), m["content"].str()};
}

ParseOutcome parse_line(std::string_view line, const LinePattern& pattern, const LogRecord* prev,
                        std::size_t line_no, std::string_view source) {
  const auto text = strip_eol(line);
  if (auto fields = pattern.match(text)) {
    const auto ts = parse_timestamp(trim(fields->timestamp), pattern.timestamp_format());
    const auto content = trim(fields->content);
    if (ts && !content.empty()) {
      LogRecord r;
      r.timestamp = *ts;
      r.level = parse_level(trim(fields->level));
      r.content = std::string(content);
      r.raw = std::string(text);
      r.line_no = line_no;
      r.source = std::string(source);
      return r;
    }
  }
  if (prev) return Continuation{std::string(text)};
  return Unparseable{std::string(text)};
}

void append_continuation(LogRecord& prev, std::string_view text) {
  prev.raw += '\n';
  prev.raw += text;
  const auto body = trim(text);
  if (body.empty()) return;
  prev.content += '\n';
  prev.content += text.substr(0, text.find_last_not_of(" \t\r\n\f\v") + 1);
}

std::vector<LogRecord> parse_records(const std::vector<std::string>& lines,
                                     const LinePattern& pattern, std::string_view source,
                                     SkipReport* skips, std::size_t first_line_no) {
  std::vector<LogRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = first_line_no + i;
    auto outcome = parse_line(lines[i], pattern, out.empty() ? nullptr : &out.back(), line_no, source);
    if (auto* rec = std::get_if<LogRecord>(&outcome)) {
      out.push_back(std::move(*rec));
    } else if (auto* cont = std::get_if<Continuation>(&outcome)) {
      append_continuation(out.back(), cont->text);
    } else if (skips) {
      const auto& bad = std::get<Unparseable>(outcome);
      if (!trim(bad.line).empty()) skips->skipped.emplace_back(line_no, bad.line);
    }
  }
  return out;
}

std::vector<LogRecord> deduplicate(std::vector<LogRecord> records) {
  std::unordered_set<std::string> seen;
  std::vector<LogRecord> out;
  out.reserve(records.size());
  for (auto& r : records) {
    if (seen.insert(r.content).second) out.push_back(std::move(r));
  }
  return out;
}

LogSession make_session(std::vector<LogRecord> records, const PreprocessOptions& options) {
  if (options.window) {
    const auto w = *options.window;
    std::erase_if(records, [&](const LogRecord& r) { return r.timestamp < w.start || r.timestamp >= w.end; });
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const LogRecord& a, const LogRecord& b) { return a.timestamp < b.timestamp; });
  records = deduplicate(std::move(records));
  if (records.empty()) throw EmptySession("session '" + options.session_id + "' has no parseable records");

  LogSession s;
  s.session_id = options.session_id;
  if (options.window) {
    s.window_start = options.window->start;
    s.window_end = options.window->end;
  } else {
    s.window_start = records.front().timestamp;
    s.window_end = records.back().timestamp + 1;
  }
  s.records = std::move(records);
  return s;
}

LogSession preprocess_session(const std::vector<std::string>& raw_lines, const LinePattern& pattern,
                              const PreprocessOptions& options, SkipReport* skips) {
  return make_session(parse_records(raw_lines, pattern, options.source, skips), options);
}

std::string serialize_line(const LogRecord& record) {
  std::string out = format_timestamp(record.timestamp);
  out += ' ';
  out += to_string(record.level);
  out += ' ';
  out += record.content;
  return out;
}

}  // namespace lofi
