#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lofi/decision_tree.hpp"
#include "lofi/drain.hpp"
#include "lofi/extraction.hpp"
#include "lofi/record.hpp"

namespace lofi {

inline constexpr TimestampMs kDefaultWindowMs = 10000;

// Tumbling windows aligned to multiples of window_ms. Records must arrive in time order;
// anything older than the open window is dropped and counted.
class Sessionizer {
 public:
  explicit Sessionizer(TimestampMs window_ms = kDefaultWindowMs);

  // Returns the session closed by this record, if any.
  std::optional<LogSession> push(LogRecord record);
  std::optional<LogSession> flush();

  std::size_t late_drops() const noexcept { return late_drops_; }
  TimestampMs window_ms() const noexcept { return window_ms_; }

 private:
  TimestampMs window_ms_;
  std::optional<TimestampMs> open_start_;
  std::vector<LogRecord> pending_;
  std::size_t late_drops_ = 0;
};

std::vector<LogSession> sessionize(std::vector<LogRecord> records, TimestampMs window_ms = kDefaultWindowMs,
                                   std::size_t* late_drops = nullptr);

struct TemplateCountVector {
  std::vector<std::size_t> counts;  // indexed by template id
  std::size_t oov = 0;

  std::size_t total() const noexcept;
  // counts followed by the OOV slot (feature index = vocabulary size).
  FeatureVector features() const;
};

// Frozen matching: the state is not modified.
TemplateCountVector count_vector(const LogSession& session, const DrainState& frozen);

struct AnomalyModel {
  static constexpr int kVersion = 1;
  DrainState drain;
  DecisionTreeModel tree;
};

// Learns templates from every training session, freezes them, then fits the tree.
AnomalyModel train_anomaly_model(const std::vector<LogSession>& anomalous, const std::vector<LogSession>& normal,
                                 const DrainParams& drain_params = {}, const DtParams& dt_params = {});

// {"version", "params": {"drain", "dt"}, "vocab": [...], "tree": {...}}
nlohmann::json to_json(const AnomalyModel& model);
AnomalyModel anomaly_model_from_json(const nlohmann::json& j);
void save_anomaly_model(const AnomalyModel& model, const std::string& path);
AnomalyModel load_anomaly_model(const std::string& path);

DtPrediction detect(const AnomalyModel& model, const LogSession& session);

struct OnlineConfig {
  TimestampMs window_ms = kDefaultWindowMs;
  ExtractConfig extract;
  std::size_t jobs = 1;       // concurrent extractions
  bool emit_normal = false;   // also report windows judged normal
};

struct OnlineResult {
  TimestampMs window_start = 0;
  TimestampMs window_end = 0;
  std::size_t records = 0;
  bool anomalous = false;
  double score = 0.0;
  std::optional<FaultInfo> info;  // set for anomalous windows
  bool degraded = false;
};

// {"window_start", "window_end", "anomalous", "fid", "fip", "degraded"}
nlohmann::json to_json(const OnlineResult& result);

struct OnlineStats {
  std::size_t sessions = 0;
  std::size_t anomalous = 0;
  std::size_t extracted = 0;
  std::size_t failures = 0;
  std::size_t late_drops = 0;
};

// Streaming detector + extractor. Results reach the sink in window order.
class OnlinePipeline {
 public:
  using Sink = std::function<void(const OnlineResult&)>;

  OnlinePipeline(const AnomalyModel& model, const Embedder* embedder, const SpanBackend* backend,
                 OnlineConfig config, Sink sink);
  ~OnlinePipeline();

  void push(LogRecord record);
  void finish();
  OnlineStats stats() const;

 private:
  struct Pending {
    OnlineResult result;
    std::optional<std::future<ExtractionResult>> extraction;
  };
  void handle(LogSession session);
  void emit_ready(bool drain_all);

  const AnomalyModel& model_;
  const Embedder* embedder_;
  const SpanBackend* backend_;
  OnlineConfig config_;
  Sink sink_;
  Sessionizer sessionizer_;
  std::deque<Pending> pending_;
  OnlineStats stats_;
};

std::vector<OnlineResult> run_online(std::vector<LogRecord> records, const AnomalyModel& model,
                                     const Embedder* embedder, const SpanBackend* backend,
                                     const OnlineConfig& config = {}, OnlineStats* stats = nullptr);

}  // namespace lofi
