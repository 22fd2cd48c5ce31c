#include "lofi/online.hpp"

#include <fstream>
#include <numeric>

#include "lofi/error.hpp"
#include "lofi/ingest.hpp"

namespace lofi {

namespace {

TimestampMs window_floor(TimestampMs ts, TimestampMs w) {
  TimestampMs q = ts / w;
  if (ts % w != 0 && ts < 0) --q;
  return q * w;
}

}  // namespace

Sessionizer::Sessionizer(TimestampMs window_ms) : window_ms_(window_ms) {
  if (window_ms_ <= 0) throw ConfigError("window_ms must be positive");
}

std::optional<LogSession> Sessionizer::push(LogRecord record) {
  const TimestampMs start = window_floor(record.timestamp, window_ms_);
  if (open_start_ && start < *open_start_) {
    ++late_drops_;
    return std::nullopt;
  }
  std::optional<LogSession> closed;
  if (open_start_ && start > *open_start_) closed = flush();
  open_start_ = start;
  pending_.push_back(std::move(record));
  return closed;
}

std::optional<LogSession> Sessionizer::flush() {
  if (!open_start_ || pending_.empty()) return std::nullopt;
  LogSession s;
  s.window_start = *open_start_;
  s.window_end = *open_start_ + window_ms_;
  s.session_id = "w" + std::to_string(s.window_start);
  s.records = std::move(pending_);
  pending_.clear();
  // The window stays the watermark; later records for it are late.
  return s;
}

std::vector<LogSession> sessionize(std::vector<LogRecord> records, TimestampMs window_ms, std::size_t* late_drops) {
  Sessionizer sz(window_ms);
  std::vector<LogSession> out;
  for (auto& r : records)
    if (auto s = sz.push(std::move(r))) out.push_back(std::move(*s));
  if (auto s = sz.flush()) out.push_back(std::move(*s));
  if (late_drops) *late_drops = sz.late_drops();
  return out;
}

std::size_t TemplateCountVector::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), oov);
}

FeatureVector TemplateCountVector::features() const {
  FeatureVector f(counts.begin(), counts.end());
  f.push_back(static_cast<double>(oov));
  return f;
}

TemplateCountVector count_vector(const LogSession& session, const DrainState& frozen) {
  TemplateCountVector v;
  v.counts.assign(frozen.templates().size(), 0);
  for (const auto& r : session.records) {
    if (auto id = frozen.match(r.content)) ++v.counts[*id];
    else ++v.oov;
  }
  return v;
}

AnomalyModel train_anomaly_model(const std::vector<LogSession>& anomalous, const std::vector<LogSession>& normal,
                                 const DrainParams& drain_params, const DtParams& dt_params) {
  if (anomalous.empty() || normal.empty())
    throw InputError("anomaly model training needs both anomalous and normal sessions");
  DrainState learner(drain_params);
  for (const auto* group : {&anomalous, &normal})
    for (const auto& s : *group)
      for (const auto& r : s.records) learner.learn(r.content);

  AnomalyModel model{DrainState::from_templates(learner.vocabulary(), drain_params), {}};
  std::vector<FeatureVector> pos, neg;
  for (const auto& s : anomalous) pos.push_back(count_vector(s, model.drain).features());
  for (const auto& s : normal) neg.push_back(count_vector(s, model.drain).features());
  model.tree = dt_train(pos, neg, dt_params);
  return model;
}

nlohmann::json to_json(const AnomalyModel& model) {
  const auto& dp = model.drain.params();
  auto tree = to_json(model.tree);
  nlohmann::json params{{"drain", {{"depth", dp.depth}, {"sim_threshold", dp.sim_threshold}, {"max_children", dp.max_children}}},
                        {"dt", tree["params"]}};
  tree.erase("params");
  return {{"version", AnomalyModel::kVersion},
          {"params", std::move(params)},
          {"vocab", model.drain.vocabulary()},
          {"tree", std::move(tree)}};
}

AnomalyModel anomaly_model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != AnomalyModel::kVersion)
      throw InputError("unsupported model version " + std::to_string(version));
    const auto& p = j.at("params");
    DrainParams dp;
    dp.depth = p.at("drain").at("depth").get<std::size_t>();
    dp.sim_threshold = p.at("drain").at("sim_threshold").get<double>();
    dp.max_children = p.at("drain").at("max_children").get<std::size_t>();
    auto tree_json = j.at("tree");
    tree_json["params"] = p.at("dt");
    AnomalyModel m{DrainState::from_templates(j.at("vocab").get<std::vector<std::string>>(), dp),
                   tree_from_json(tree_json)};
    if (m.tree.n_features != m.drain.templates().size() + 1)
      throw InputError("model tree width does not match its vocabulary");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
}

void save_anomaly_model(const AnomalyModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << to_json(model).dump(2) << '\n';
}

AnomalyModel load_anomaly_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return anomaly_model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

DtPrediction detect(const AnomalyModel& model, const LogSession& session) {
  return dt_predict(model.tree, count_vector(session, model.drain).features());
}

nlohmann::json to_json(const OnlineResult& r) {
  nlohmann::json j{{"window_start", r.window_start}, {"window_end", r.window_end}, {"anomalous", r.anomalous}};
  j["fid"] = r.info ? r.info->fid : std::string();
  j["fip"] = r.info && r.info->fip ? nlohmann::json(*r.info->fip) : nlohmann::json(nullptr);
  j["degraded"] = r.degraded;
  return j;
}

OnlinePipeline::OnlinePipeline(const AnomalyModel& model, const Embedder* embedder, const SpanBackend* backend,
                               OnlineConfig config, Sink sink)
    : model_(model),
      embedder_(embedder),
      backend_(backend),
      config_(std::move(config)),
      sink_(std::move(sink)),
      sessionizer_(config_.window_ms) {
  if (config_.jobs == 0) config_.jobs = 1;
}

OnlinePipeline::~OnlinePipeline() {
  for (auto& p : pending_)
    if (p.extraction) p.extraction->wait();
}

void OnlinePipeline::push(LogRecord record) {
  if (auto s = sessionizer_.push(std::move(record))) handle(std::move(*s));
}

void OnlinePipeline::finish() {
  if (auto s = sessionizer_.flush()) handle(std::move(*s));
  emit_ready(true);
}

OnlineStats OnlinePipeline::stats() const {
  OnlineStats s = stats_;
  s.late_drops = sessionizer_.late_drops();
  return s;
}

void OnlinePipeline::handle(LogSession session) {
  ++stats_.sessions;
  Pending p;
  p.result.window_start = session.window_start;
  p.result.window_end = session.window_end;
  p.result.records = session.records.size();
  const auto pred = detect(model_, session);
  p.result.anomalous = pred.anomalous;
  p.result.score = pred.score;
  if (pred.anomalous) {
    ++stats_.anomalous;
    PreprocessOptions opts{session.session_id, {}, TimeWindow{session.window_start, session.window_end}};
    auto task = [this, opts, recs = std::move(session.records)]() mutable {
      return extract(make_session(std::move(recs), opts), embedder_, backend_, config_.extract);
    };
    if (config_.jobs > 1) {
      p.extraction = std::async(std::launch::async, std::move(task));
    } else {
      std::promise<ExtractionResult> done;
      try {
        done.set_value(task());
      } catch (...) {
        done.set_exception(std::current_exception());
      }
      p.extraction = done.get_future();
    }
  }
  pending_.push_back(std::move(p));
  emit_ready(false);
}

void OnlinePipeline::emit_ready(bool drain_all) {
  while (!pending_.empty()) {
    auto& front = pending_.front();
    if (front.extraction) {
      const bool ready = front.extraction->wait_for(std::chrono::seconds(0)) == std::future_status::ready;
      if (!ready && !drain_all && pending_.size() <= config_.jobs) return;
      try {
        auto res = front.extraction->get();
        front.result.info = std::move(res.info);
        front.result.degraded = res.degraded;
        ++stats_.extracted;
      } catch (const std::exception&) {
        // One bad window must not stall the stream; report it as degraded with no answer.
        ++stats_.failures;
        front.result.info = FaultInfo{};
        front.result.degraded = true;
      }
    }
    if (front.result.anomalous || config_.emit_normal) sink_(front.result);
    pending_.pop_front();
  }
}

std::vector<OnlineResult> run_online(std::vector<LogRecord> records, const AnomalyModel& model,
                                     const Embedder* embedder, const SpanBackend* backend,
                                     const OnlineConfig& config, OnlineStats* stats) {
  std::vector<OnlineResult> out;
  OnlinePipeline pipeline(model, embedder, backend, config,
                          [&](const OnlineResult& r) { out.push_back(r); });
  for (auto& r : records) pipeline.push(std::move(r));
  pipeline.finish();
  if (stats) *stats = pipeline.stats();
  return out;
}

}  // namespace lofi
