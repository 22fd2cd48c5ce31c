#include "lofi/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "lofi/error.hpp"
#include "lofi/ingest.hpp"
#include "lofi/json_io.hpp"

namespace lofi {

namespace {

// mt19937_64 is fully specified by the standard; the distributions are not, so bounded
// draws are done here to keep corpora byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

using Vars = std::map<std::string, std::string>;

std::string draw_value(const std::string& name, Rng& rng) {
  if (name == "k") return std::to_string(rng.between(1, 9));
  if (name == "n") return std::to_string(rng.between(1, 999));
  if (name == "int") return std::to_string(rng.between(1, 99999));
  if (name == "port") return std::to_string(rng.between(1024, 65535));
  if (name == "node") return std::to_string(rng.between(1, 64));
  if (name == "exec") return std::to_string(rng.between(1, 128));
  if (name == "ip")
    return "10." + std::to_string(rng.between(0, 255)) + "." + std::to_string(rng.between(0, 255)) + "." +
           std::to_string(rng.between(1, 254));
  if (name == "hex") {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (int i = 0; i < 32; ++i) s += digits[rng.below(16)];
    return s;
  }
  throw ConfigError("unknown placeholder {" + name + "}");
}

// Fills {name} placeholders. Names present in `vars` reuse their value; others are drawn
// fresh per occurrence unless `bind` is set, in which case the draw is stored.
std::string fill(const std::string& tpl, Vars& vars, Rng& rng, bool bind) {
  std::string out;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    if (tpl[i] != '{') {
      out += tpl[i];
      continue;
    }
    const auto close = tpl.find('}', i);
    if (close == std::string::npos) throw ConfigError("unterminated placeholder in '" + tpl + "'");
    const std::string name = tpl.substr(i + 1, close - i - 1);
    if (auto it = vars.find(name); it != vars.end()) {
      out += it->second;
    } else {
      auto v = draw_value(name, rng);
      if (bind) vars[name] = v;
      out += v;
    }
    i = close;
  }
  return out;
}

const std::vector<std::string>& cascade_templates() {
  static const std::vector<std::string> t = {
      "Lost task {n}.0 in stage {k}.0 (TID {int}, worker-{node}, executor {exec}): ExecutorLostFailure",
      "Task {n}.0 in stage {k}.0 failed 4 times; aborting job",
      "Exception in task {n}.0 in stage {k}.0 (TID {int})",
  };
  return t;
}

struct Line {
  LogLevel level;
  std::string content;
};

class Generator {
 public:
  Generator(const CorpusSpec& spec) : spec_(spec), rng_(spec.seed) {
    for (const auto& t : spec_.templates) {
      if (t.level == LogLevel::Debug || t.level == LogLevel::Trace) noise_pool_.push_back(&t);
      else chatter_pool_.push_back(&t);
    }
  }

  LogSession normal_session(const std::string& id, std::size_t slot) {
    const std::size_t n = draw_length();
    std::vector<Line> lines;
    std::set<std::string> used;
    while (lines.size() < n) lines.push_back(chatter(used));
    return build(id, slot, std::move(lines));
  }

  FaultCase fault_case(const std::string& id, std::size_t slot, const FaultProfile& p) {
    Vars vars;
    const std::string fault_line = fill(p.fault_line, vars, rng_, true);
    FaultCase c;
    c.case_id = id;
    c.fault_kind = p.fault_kind;
    c.gold.fid = fill(p.fid, vars, rng_, true);
    if (!p.fip.empty()) c.gold.fip = fill(p.fip, vars, rng_, true);
    c.gold.fid_subtype = p.fid_subtype;
    c.gold.fip_subtype = p.fip_subtype;

    std::set<std::string> used{fault_line};
    std::vector<Line> burst{{p.level, fault_line}};
    const auto burst_len = static_cast<std::size_t>(rng_.between(static_cast<std::int64_t>(p.burst_min),
                                                                  static_cast<std::int64_t>(p.burst_max)));
    const LogLevel cascade_level = p.level == LogLevel::Fatal ? LogLevel::Error : p.level;
    while (burst.size() < burst_len) {
      Vars fresh;
      auto text = fill(cascade_templates()[rng_.below(cascade_templates().size())], fresh, rng_, false);
      if (used.insert(text).second) burst.push_back({cascade_level, std::move(text)});
    }
    std::optional<Line> echo;
    if (spec_.plant_echo && !p.echo_line.empty()) {
      echo = Line{LogLevel::Info, fill(p.echo_line, vars, rng_, true)};
      used.insert(echo->content);
    }

    const std::size_t n = draw_length();
    const std::size_t fixed = burst.size() + (echo ? 1 : 0);
    std::vector<Line> lines;
    while (lines.size() + fixed < n) lines.push_back(chatter(used));
    const std::size_t at = static_cast<std::size_t>(rng_.between(static_cast<std::int64_t>(lines.size() / 4),
                                                                  static_cast<std::int64_t>(3 * lines.size() / 4)));
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(at), burst.begin(), burst.end());
    if (echo) {
      const std::size_t after = at + burst.size();
      const std::size_t echo_at = std::min(lines.size(), after + static_cast<std::size_t>(rng_.between(0, 3)));
      lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(echo_at), *echo);
    }
    c.session = build(id, slot, std::move(lines));
    return c;
  }

  std::uint64_t below(std::uint64_t n) { return rng_.below(n); }

 private:
  std::size_t draw_length() {
    const auto target = static_cast<double>(spec_.logs_per_session);
    const auto lo = static_cast<std::int64_t>(std::ceil(0.8 * target));
    const auto hi = static_cast<std::int64_t>(std::floor(1.2 * target));
    return static_cast<std::size_t>(rng_.between(lo, std::max(lo, hi)));
  }

  Line chatter(std::set<std::string>& used) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const bool noisy = !noise_pool_.empty() && rng_.unit() < spec_.noise;
      const auto& pool = noisy || chatter_pool_.empty() ? noise_pool_ : chatter_pool_;
      double total = 0.0;
      for (const auto* t : pool) total += t->weight;
      double pick = rng_.unit() * total;
      const NormalTemplate* chosen = pool.back();
      for (const auto* t : pool) {
        if (pick < t->weight) {
          chosen = t;
          break;
        }
        pick -= t->weight;
      }
      Vars fresh;
      auto text = fill(chosen->text, fresh, rng_, false);
      if (used.insert(text).second) return {chosen->level, std::move(text)};
    }
    throw ConfigError("normal template pool too small to fill a session without duplicates");
  }

  LogSession build(const std::string& id, std::size_t slot, std::vector<Line> lines) {
    LogSession s;
    s.session_id = id;
    s.window_start = spec_.epoch_ms + static_cast<TimestampMs>(slot) * spec_.window_ms;
    s.window_end = s.window_start + spec_.window_ms;
    std::vector<TimestampMs> offsets(lines.size());
    for (auto& o : offsets) o = static_cast<TimestampMs>(rng_.below(static_cast<std::uint64_t>(spec_.window_ms)));
    std::sort(offsets.begin(), offsets.end());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      LogRecord r;
      r.timestamp = s.window_start + offsets[i];
      r.level = lines[i].level;
      r.content = std::move(lines[i].content);
      r.line_no = i + 1;
      r.source = "synthetic/" + id;
      r.raw = serialize_line(r);
      s.records.push_back(std::move(r));
    }
    return s;
  }

  const CorpusSpec& spec_;
  Rng rng_;
  std::vector<const NormalTemplate*> chatter_pool_;
  std::vector<const NormalTemplate*> noise_pool_;
};

std::string pad_id(const std::string& prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return prefix + digits;
}

std::string_view trim_view(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  if (v.empty()) throw ConfigError("empty value for " + std::string(key));
  for (char c : v) {
    if (c < '0' || c > '9') throw ConfigError("non-numeric value for " + std::string(key) + ": " + std::string(v));
    out = out * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return out;
}

}  // namespace

std::vector<NormalTemplate> default_normal_templates() {
  using L = LogLevel;
  return {
      {L::Info, "Starting task {n}.0 in stage {k}.0 (TID {int}, worker-{node}, executor {exec}, partition {n}, PROCESS_LOCAL, 7820 bytes)", 3.0},
      {L::Info, "Finished task {n}.0 in stage {k}.0 (TID {int}) in {n} ms on worker-{node} (executor {exec}) ({n}/200)", 3.0},
      {L::Info, "Running task {n}.0 in stage {k}.0 (TID {int})", 2.0},
      {L::Info, "Got assigned task {int}", 2.0},
      {L::Info, "Block broadcast_{n} stored as values in memory (estimated size {n}.0 KB, free {n}.0 MB)", 1.0},
      {L::Info, "Added broadcast_{n}_piece0 in memory on worker-{node}:{port} (size: {n}.0 KB, free: {n}.0 MB)", 1.0},
      {L::Info, "Reading broadcast variable {n} took {n} ms", 1.0},
      {L::Info, "Updating epoch to {n} and clearing cache", 0.5},
      {L::Info, "Getting {n} non-empty blocks out of {n} blocks", 1.0},
      {L::Info, "Started {k} remote fetches in {n} ms", 1.0},
      {L::Info, "Saved output of task 'attempt_{int}_m_{int}' to hdfs://namenode:8020/out/part-{int}", 0.5},
      {L::Warn, "Slow heartbeat response from worker-{node}: took {n} ms", 0.3},
      {L::Warn, "Block rdd_{n}_{k} already exists on this machine; not re-adding it", 0.2},
      {L::Debug, "Sending heartbeat to driver at {ip}:{port}", 1.0},
      {L::Debug, "Polling metrics registry, {n} gauges updated", 1.0},
  };
}

std::vector<FaultProfile> default_fault_profiles() {
  using L = LogLevel;
  using F = FidSubtype;
  using P = FipSubtype;
  return {
      {"bean-creation", "config", L::Error,
       "Error creating bean with name 'dataSource' defined in ServicePath{k}: Invocation of init method failed",
       "Error creating bean", "ServicePath{k}", F::ErrorMessage, P::ComponentId, 2, 3,
       "Retrying context refresh: Error creating bean with name 'dataSource' defined in ServicePath{k}"},
      {"url-detection", "application", L::Error, "url detection error! taskId:{hex}", "url detection error",
       "taskId:{hex}", F::ErrorMessage, P::ComponentId, 2, 3, "Requeued url detection for taskId:{hex} after error"},
      {"connection-refused", "network", L::Error,
       "Failed to connect to /{ip}:{port} for shuffle fetch: Connection refused", "Connection refused", "{ip}:{port}",
       F::ErrorMessage, P::Address, 2, 3, "Will retry shuffle fetch from /{ip}:{port} after Connection refused"},
      {"executor-killed", "process-kill", L::Error,
       "Executor {exec} on worker-{node} exited unexpectedly with exit code 137", "exited unexpectedly",
       "worker-{node}", F::AbnormalBehavior, P::ComponentId, 2, 3,
       "Removing executor {exec} on worker-{node}: executor exited unexpectedly"},
      {"disk-full", "disk", L::Error, "No space left on device while writing shuffle file to /data{k}/spark/local",
       "No space left on device", "/data{k}/spark/local", F::ErrorMessage, P::Address, 2, 3,
       "Cleaning shuffle files under /data{k}/spark/local after No space left on device"},
      {"heap-oom", "memory", L::Fatal, "java.lang.OutOfMemoryError: Java heap space in executor {exec}",
       "OutOfMemoryError: Java heap space", "executor {exec}", F::ErrorMessage, P::ComponentId, 2, 3,
       "Heap dump requested for executor {exec} after OutOfMemoryError: Java heap space"},
      {"read-timeout", "network", L::Error,
       "Read timed out after {int} ms waiting for block from worker-{node}:{port}", "Read timed out",
       "worker-{node}:{port}", F::ErrorMessage, P::Address, 2, 3,
       "Block fetch from worker-{node}:{port} read timed out, retrying"},
      {"missing-file", "config", L::Error, "Cannot find file hdfs://namenode:8020/user/spark/conf/app{k}.conf",
       "Cannot find file", "app{k}.conf", F::MissingComponent, P::ParameterName, 2, 3,
       "Looking for file hdfs://namenode:8020/user/spark/conf/app{k}.conf in fallback directory"},
      {"node-unhealthy", "node", L::Error, "Node worker-{node} status changed to UNHEALTHY by health monitor",
       "status changed to UNHEALTHY", "worker-{node}", F::WrongStatus, P::ComponentId, 2, 3,
       "Node worker-{node} health report: status changed to UNHEALTHY"},
      {"bad-parameter", "config", L::Error,
       "Invalid value {k}x for parameter spark.executor.cores: must be a positive integer", "Invalid value",
       "spark.executor.cores", F::ErrorMessage, P::ParameterName, 2, 3,
       "Falling back to default for parameter spark.executor.cores after Invalid value {k}x"},
      {"heartbeat-timeout", "process-kill", L::Error,
       "Heartbeat timeout: no heartbeat from executor {exec} for {int} ms", "Heartbeat timeout", "executor {exec}",
       F::AbnormalBehavior, P::ComponentId, 2, 3, "Marking executor {exec} as lost after heartbeat timeout"},
      {"result-too-large", "application", L::Error,
       "Job aborted due to stage failure: total size of serialized results is bigger than spark.driver.maxResultSize",
       "Job aborted due to stage failure", "", F::AbnormalBehavior, std::nullopt, 2, 3,
       "Cancelling remaining tasks: Job aborted due to stage failure"},
  };
}

CorpusSpec CorpusSpec::defaults() {
  CorpusSpec s;
  s.templates = default_normal_templates();
  s.profiles = default_fault_profiles();
  return s;
}

CorpusSpec parse_corpus_spec(const std::string& text) {
  CorpusSpec spec = CorpusSpec::defaults();
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = trim_view(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError("corpus spec line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim_view(body.substr(0, eq));
    const auto value = trim_view(body.substr(eq + 1));
    if (key == "seed") spec.seed = to_uint(key, value);
    else if (key == "n_cases") spec.n_cases = to_uint(key, value);
    else if (key == "n_train") spec.n_train = to_uint(key, value);
    else if (key == "n_normal") spec.n_normal = to_uint(key, value);
    else if (key == "logs_per_session") spec.logs_per_session = to_uint(key, value);
    else if (key == "window_ms") spec.window_ms = static_cast<TimestampMs>(to_uint(key, value));
    else if (key == "epoch_ms") spec.epoch_ms = static_cast<TimestampMs>(to_uint(key, value));
    else if (key == "plant_echo") spec.plant_echo = value == "true" || value == "1";
    else if (key == "noise") {
      try {
        spec.noise = std::stod(std::string(value));
      } catch (const std::exception&) {
        throw ConfigError("bad noise value: " + std::string(value));
      }
    } else if (key == "profiles") {
      if (value == "all") continue;
      std::vector<FaultProfile> chosen;
      const auto all = default_fault_profiles();
      std::stringstream names{std::string(value)};
      std::string name;
      while (std::getline(names, name, ',')) {
        const auto n = trim_view(name);
        auto it = std::find_if(all.begin(), all.end(), [&](const FaultProfile& p) { return p.name == n; });
        if (it == all.end()) throw ConfigError("unknown fault profile '" + std::string(n) + "'");
        chosen.push_back(*it);
      }
      spec.profiles = std::move(chosen);
    } else {
      throw ConfigError("unknown corpus spec key '" + std::string(key) + "'");
    }
  }
  return spec;
}

std::string format_corpus_spec(const CorpusSpec& spec) {
  std::ostringstream os;
  os << "seed = " << spec.seed << "\n"
     << "n_cases = " << spec.n_cases << "\n"
     << "n_train = " << spec.n_train << "\n"
     << "n_normal = " << spec.n_normal << "\n"
     << "logs_per_session = " << spec.logs_per_session << "\n"
     << "noise = " << spec.noise << "\n"
     << "window_ms = " << spec.window_ms << "\n"
     << "epoch_ms = " << spec.epoch_ms << "\n"
     << "plant_echo = " << (spec.plant_echo ? "true" : "false") << "\n"
     << "profiles = ";
  for (std::size_t i = 0; i < spec.profiles.size(); ++i) os << (i ? "," : "") << spec.profiles[i].name;
  os << "\n";
  return os.str();
}

std::optional<std::string> check_fault_case(const FaultCase& c) {
  auto contains = [&](const std::string& needle) {
    return std::any_of(c.session.records.begin(), c.session.records.end(),
                       [&](const LogRecord& r) { return r.content.find(needle) != std::string::npos; });
  };
  if (c.gold.fid.empty()) return "case " + c.case_id + ": empty gold FID";
  if (!contains(c.gold.fid)) return "case " + c.case_id + ": gold FID not found in any record";
  if (c.gold.fip && !contains(*c.gold.fip)) return "case " + c.case_id + ": gold FIP not found in any record";
  return std::nullopt;
}

Corpus gen_corpus(const CorpusSpec& spec) {
  if (spec.profiles.empty()) throw ConfigError("corpus spec has no fault profiles");
  if (spec.templates.empty()) throw ConfigError("corpus spec has no normal templates");
  if (spec.window_ms <= 0) throw ConfigError("window_ms must be positive");
  if (spec.logs_per_session < 5) throw ConfigError("logs_per_session must be at least 5");
  const auto min_len = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(spec.logs_per_session)));
  for (const auto& p : spec.profiles) {
    if (p.burst_min < 1 || p.burst_max < p.burst_min) throw ConfigError("profile " + p.name + ": bad burst range");
    if (p.burst_max + 1 >= min_len)
      throw ConfigError("profile " + p.name + ": burst of " + std::to_string(p.burst_max) +
                        " lines does not fit in a session of " + std::to_string(min_len));
  }
  if (static_cast<TimestampMs>(1.2 * static_cast<double>(spec.logs_per_session)) > spec.window_ms)
    throw ConfigError("sessions of " + std::to_string(spec.logs_per_session) + " logs do not fit in a " +
                      std::to_string(spec.window_ms) + " ms window");

  const std::size_t n_normal = spec.n_normal ? spec.n_normal : std::max(spec.n_train, spec.n_cases);
  Generator gen(spec);
  Corpus corpus;
  std::size_t slot = 0;

  // Training cases cycle through the profiles so the detector sees every fault template.
  for (std::size_t i = 0; i < spec.n_train; ++i)
    corpus.train.push_back(gen.fault_case(pad_id("train-", i), slot++, spec.profiles[i % spec.profiles.size()]));
  for (std::size_t i = 0; i < n_normal; ++i) corpus.normal.push_back(gen.normal_session(pad_id("normal-", i), slot++));

  // Stream region: test faults and held-out normal windows in a shuffled order.
  std::vector<bool> is_fault(spec.n_cases, true);
  is_fault.resize(spec.n_cases + n_normal, false);
  for (std::size_t i = is_fault.size(); i > 1; --i) {
    const auto j = gen.below(i);
    const bool tmp = is_fault[i - 1];
    is_fault[i - 1] = is_fault[j];
    is_fault[j] = tmp;
  }
  std::size_t next_test = 0, next_normal = 0;
  for (bool fault : is_fault) {
    if (fault) {
      const auto& profile = spec.profiles[gen.below(spec.profiles.size())];
      corpus.test.push_back(gen.fault_case(pad_id("test-", next_test++), slot++, profile));
      const auto& c = corpus.test.back();
      corpus.fault_windows.emplace_back(c.session.window_start, c.case_id);
      for (const auto& r : c.session.records) corpus.stream.push_back(r);
    } else {
      corpus.stream_normal.push_back(gen.normal_session(pad_id("stream-normal-", next_normal++), slot++));
      for (const auto& r : corpus.stream_normal.back().records) corpus.stream.push_back(r);
    }
  }

  for (const auto* set : {&corpus.train, &corpus.test})
    for (const auto& c : *set)
      if (auto why = check_fault_case(c)) throw std::logic_error("generator broke gold containment: " + *why);
  return corpus;
}

nlohmann::json to_json(const FaultCase& c) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : c.session.records) records.push_back(to_json(r));
  return {{"case_id", c.case_id},
          {"records", std::move(records)},
          {"gold", to_json(c.gold)},
          {"fault_kind", c.fault_kind},
          {"window_start", c.session.window_start},
          {"window_end", c.session.window_end}};
}

FaultCase fault_case_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("fault case must be a JSON object");
  FaultCase c;
  try {
    c.case_id = j.at("case_id").get<std::string>();
    c.fault_kind = j.contains("fault_kind") && !j["fault_kind"].is_null() ? j["fault_kind"].get<std::string>() : "";
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad case_id/fault_kind: ") + e.what());
  }
  if (!j.contains("records") || !j["records"].is_array()) throw InputError("fault case lacks a records array");
  if (!j.contains("gold")) throw InputError("fault case lacks gold");
  for (const auto& r : j["records"]) c.session.records.push_back(record_from_json(r));
  if (c.session.records.empty()) throw InputError("fault case '" + c.case_id + "' has no records");
  c.gold = fault_info_from_json(j["gold"]);
  c.session.session_id = c.case_id;
  if (j.contains("window_start") && j.contains("window_end")) {
    c.session.window_start = j["window_start"].get<TimestampMs>();
    c.session.window_end = j["window_end"].get<TimestampMs>();
  } else {
    c.session.window_start = c.session.records.front().timestamp;
    c.session.window_end = c.session.records.back().timestamp + 1;
  }
  if (auto why = check_session(c.session)) throw InputError("case '" + c.case_id + "': " + *why);
  return c;
}

std::vector<FaultCase> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<FaultCase> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(fault_case_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ": " + e.what(), line_no);
    } catch (const InputError& e) {
      if (e.line()) throw;
      throw InputError(path + ": " + e.what(), line_no);
    }
  }
  return out;
}

void save_dataset(const std::vector<FaultCase>& cases, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& c : cases) write_jsonl_line(out, to_json(c));
}

std::vector<LogSession> load_sessions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<LogSession> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(session_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ": " + e.what(), line_no);
    } catch (const InputError& e) {
      if (e.line()) throw;
      throw InputError(path + ": " + e.what(), line_no);
    }
  }
  return out;
}

void save_sessions(const std::vector<LogSession>& sessions, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& s : sessions) write_jsonl_line(out, to_json(s));
}

void write_corpus(const Corpus& corpus, const CorpusSpec& spec, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir + ": " + ec.message());
  const fs::path base(dir);
  save_dataset(corpus.train, (base / "train.jsonl").string());
  save_dataset(corpus.test, (base / "test.jsonl").string());
  save_sessions(corpus.normal, (base / "normal.jsonl").string());
  {
    std::ofstream out(base / "stream.jsonl");
    for (const auto& r : corpus.stream) write_jsonl_line(out, to_json(r));
  }
  {
    std::ofstream out(base / "stream.log");
    for (const auto& r : corpus.stream) out << r.raw << '\n';
  }
  {
    std::ofstream out(base / "fault_windows.jsonl");
    for (const auto& [start, id] : corpus.fault_windows)
      write_jsonl_line(out, {{"window_start", start}, {"case_id", id}});
  }
  std::ofstream(base / "corpus.spec") << format_corpus_spec(spec);
}

}  // namespace lofi
