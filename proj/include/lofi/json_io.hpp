#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lofi/fault_info.hpp"
#include "lofi/record.hpp"

namespace lofi {

// {"ts", "level", "content", "raw", "line_no", "source"}
nlohmann::json to_json(const LogRecord& record);
LogRecord record_from_json(const nlohmann::json& j);

// {"session_id", "window_start", "window_end", "records": [...]}
nlohmann::json to_json(const LogSession& session);
LogSession session_from_json(const nlohmann::json& j);

// {"fid", "fip", "fid_subtype", "fip_subtype"}; absent optionals are written as null.
nlohmann::json to_json(const FaultInfo& info);
FaultInfo fault_info_from_json(const nlohmann::json& j);

// Files ending in .gz are decompressed transparently by read_lines_file().

// Reads one JSON value per non-blank line. Parse errors become InputError naming the line.
std::vector<nlohmann::json> read_jsonl(std::istream& in);
std::vector<nlohmann::json> read_jsonl_file(const std::string& path);
void write_jsonl_line(std::ostream& out, const nlohmann::json& j);

std::vector<std::string> read_lines(std::istream& in);
std::vector<std::string> read_lines_file(const std::string& path);

}  // namespace lofi
