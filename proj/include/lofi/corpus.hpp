#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lofi/fault_info.hpp"
#include "lofi/record.hpp"

namespace lofi {

struct FaultCase {
  std::string case_id;
  LogSession session;
  FaultInfo gold;
  std::string fault_kind;
};

// Gold FID (and FIP when present) must occur in some record's content.
std::optional<std::string> check_fault_case(const FaultCase& c);

// {"case_id", "records": [...], "gold": {...}, "fault_kind", "window_start", "window_end"}
nlohmann::json to_json(const FaultCase& c);
FaultCase fault_case_from_json(const nlohmann::json& j);

std::vector<FaultCase> load_dataset(const std::string& path);
void save_dataset(const std::vector<FaultCase>& cases, const std::string& path);

std::vector<LogSession> load_sessions(const std::string& path);
void save_sessions(const std::vector<LogSession>& sessions, const std::string& path);

// A fault type the generator can inject. Placeholders in braces are filled once per case so
// that the fault line, gold strings and echo line agree: {k} 1-9, {n} 1-999, {int} 1-99999,
// {hex} 32 hex digits, {ip}, {port}, {node}, {exec}.
struct FaultProfile {
  std::string name;
  std::string fault_kind;
  LogLevel level = LogLevel::Error;
  std::string fault_line;
  std::string fid;
  std::string fip;  // empty: the fault has no locating parameter
  std::optional<FidSubtype> fid_subtype;
  std::optional<FipSubtype> fip_subtype;
  std::size_t burst_min = 2;  // fault line plus cascade errors
  std::size_t burst_max = 3;
  std::string echo_line;  // INFO line that nearly repeats the fault line
};

struct NormalTemplate {
  LogLevel level = LogLevel::Info;
  std::string text;
  double weight = 1.0;
};

struct CorpusSpec {
  std::uint64_t seed = 7;
  std::size_t n_cases = 16;   // test cases
  std::size_t n_train = 32;   // training cases
  std::size_t n_normal = 0;   // normal sessions per role; 0 means max(n_train, n_cases)
  std::size_t logs_per_session = 40;
  double noise = 0.1;         // share of chatter lines drawn as DEBUG heartbeat noise
  TimestampMs window_ms = 10000;
  TimestampMs epoch_ms = 1677628800000;  // 2023-03-01T00:00:00Z
  bool plant_echo = true;
  std::vector<NormalTemplate> templates;
  std::vector<FaultProfile> profiles;

  static CorpusSpec defaults();
};

std::vector<FaultProfile> default_fault_profiles();
std::vector<NormalTemplate> default_normal_templates();

// key = value lines, '#' comments. Keys: seed, n_cases, n_train, n_normal, logs_per_session,
// noise, window_ms, epoch_ms, plant_echo, profiles (comma list of names, or "all").
CorpusSpec parse_corpus_spec(const std::string& text);
std::string format_corpus_spec(const CorpusSpec& spec);

struct Corpus {
  std::vector<FaultCase> train;
  std::vector<FaultCase> test;
  std::vector<LogSession> normal;         // negatives for detector training
  std::vector<LogSession> stream_normal;  // held-out normal windows interleaved into the stream
  // Test cases and held-out normal windows on one timeline, in time order.
  std::vector<LogRecord> stream;
  std::vector<std::pair<TimestampMs, std::string>> fault_windows;  // (window_start, case_id)
};

// Deterministic in spec + seed. Throws ConfigError for infeasible specs.
Corpus gen_corpus(const CorpusSpec& spec);

// Writes train/test/normal/stream files into `dir` (created if missing).
void write_corpus(const Corpus& corpus, const CorpusSpec& spec, const std::string& dir);

}  // namespace lofi
