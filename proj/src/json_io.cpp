#include "lofi/json_io.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>

#include "lofi/error.hpp"

namespace lofi {

namespace {

template <typename T>
T field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("missing or mistyped field '") + key + "'");
  }
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InputError(std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

}  // namespace

nlohmann::json to_json(const LogRecord& r) {
  return {{"ts", r.timestamp},  {"level", std::string(to_string(r.level))},
          {"content", r.content}, {"raw", r.raw},
          {"line_no", r.line_no}, {"source", r.source}};
}

LogRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("record must be a JSON object");
  LogRecord r;
  r.timestamp = field<TimestampMs>(j, "ts");
  r.level = parse_level(field<std::string>(j, "level"));
  r.content = field<std::string>(j, "content");
  r.raw = j.contains("raw") ? field<std::string>(j, "raw") : r.content;
  r.line_no = j.contains("line_no") ? field<std::size_t>(j, "line_no") : 0;
  r.source = j.contains("source") ? field<std::string>(j, "source") : std::string();
  return r;
}

nlohmann::json to_json(const LogSession& s) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : s.records) records.push_back(to_json(r));
  return {{"session_id", s.session_id},
          {"window_start", s.window_start},
          {"window_end", s.window_end},
          {"records", std::move(records)}};
}

LogSession session_from_json(const nlohmann::json& j) {
  LogSession s;
  s.session_id = field<std::string>(j, "session_id");
  s.window_start = field<TimestampMs>(j, "window_start");
  s.window_end = field<TimestampMs>(j, "window_end");
  if (!j.contains("records") || !j["records"].is_array()) throw InputError("session lacks a records array");
  for (const auto& r : j["records"]) s.records.push_back(record_from_json(r));
  if (auto why = check_session(s)) throw InputError("session '" + s.session_id + "': " + *why);
  return s;
}

nlohmann::json to_json(const FaultInfo& info) {
  nlohmann::json j;
  j["fid"] = info.fid;
  j["fip"] = info.fip ? nlohmann::json(*info.fip) : nlohmann::json(nullptr);
  j["fid_subtype"] = info.fid_subtype ? nlohmann::json(std::string(to_string(*info.fid_subtype))) : nlohmann::json(nullptr);
  j["fip_subtype"] = info.fip_subtype ? nlohmann::json(std::string(to_string(*info.fip_subtype))) : nlohmann::json(nullptr);
  return j;
}

FaultInfo fault_info_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("fault info must be a JSON object");
  FaultInfo info;
  info.fid = field<std::string>(j, "fid");
  info.fip = optional_string(j, "fip");
  if (auto s = optional_string(j, "fid_subtype")) info.fid_subtype = parse_fid_subtype(*s);
  if (auto s = optional_string(j, "fip_subtype")) info.fip_subtype = parse_fip_subtype(*s);
  return info;
}

std::vector<nlohmann::json> read_jsonl(std::istream& in) {
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(std::string("invalid JSON: ") + e.what(), line_no);
    }
  }
  return out;
}

std::vector<nlohmann::json> read_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_jsonl(in);
}

void write_jsonl_line(std::ostream& out, const nlohmann::json& j) { out << j.dump() << '\n'; }

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<std::string> read_lines_file(const std::string& path) {
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw InputError("cannot open " + path);
    std::string data;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(gz, buf, sizeof buf)) > 0) data.append(buf, static_cast<std::size_t>(n));
    const bool failed = n < 0;
    gzclose(gz);
    if (failed) throw InputError("corrupt gzip stream in " + path);
    std::istringstream in(data);
    return read_lines(in);
  }
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_lines(in);
}

}  // namespace lofi
