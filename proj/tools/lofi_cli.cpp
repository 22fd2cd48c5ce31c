// lofi: fault-indicating information extraction from log sessions.
//
// Subcommands: preprocess, select, extract, eval, online, gen-corpus, dt-train.
// Exit codes: 0 ok, 1 input/config error, 2 backend failure with --no-fallback, 64 usage.

#include <chrono>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <thread>

#include "CLI11.hpp"
#include "lofi/corpus.hpp"
#include "lofi/error.hpp"
#include "lofi/evaluation.hpp"
#include "lofi/extraction.hpp"
#include "lofi/ingest.hpp"
#include "lofi/json_io.hpp"
#include "lofi/online.hpp"
#include "lofi/selection.hpp"

namespace {

using namespace lofi;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitBackend = 2;
constexpr int kExitUsage = 64;

struct Options {
  // ingest
  std::string pattern{kDefaultLinePattern};
  std::string ts_format{kDefaultTimestampFormat};
  // selection
  std::string selection_mode = "combined";
  double ratio = 0.10;
  std::size_t context_radius = 1;
  std::string embedder = "builtin";
  std::size_t embed_dim = HashedTfidfEmbedder::kDefaultDim;
  // extraction
  std::string backend = "baseline";
  std::size_t max_tokens = kDefaultMaxTokens;
  std::size_t top_k = kDefaultTopK;
  std::size_t max_span_len = kDefaultMaxSpanLen;
  std::size_t baseline_words = kDefaultBaselineWords;
  double fip_min_score = 0.0;
  bool no_fallback = false;
  int timeout_ms = 30000;
  std::size_t jobs = 1;
  // online
  TimestampMs window_ms = kDefaultWindowMs;
  // detector
  std::size_t max_depth = 10;
  std::size_t min_samples_split = 2;
  std::uint64_t dt_seed = 0;
  std::size_t drain_depth = 4;
  double drain_sim = 0.4;
  std::size_t drain_max_children = 100;
  // paths
  std::string output;
};

SelectionConfig selection_config(const Options& o) {
  SelectionConfig c;
  if (o.selection_mode == "combined") c.mode = SelectionMode::Combined;
  else if (o.selection_mode == "level") c.mode = SelectionMode::LevelOnly;
  else if (o.selection_mode == "context") c.mode = SelectionMode::LevelContext;
  else if (o.selection_mode == "none") c.mode = SelectionMode::None;
  else throw ConfigError("unknown selection mode '" + o.selection_mode + "'");
  c.similar_ratio = o.ratio;
  c.context_radius = o.context_radius;
  return c;
}

ExtractConfig extract_config(const Options& o) {
  ExtractConfig c;
  c.selection = selection_config(o);
  c.max_tokens = o.max_tokens;
  c.top_k = o.top_k;
  c.max_span_len = o.max_span_len;
  c.baseline_words = o.baseline_words;
  c.fip_min_score = o.fip_min_score;
  c.allow_fallback = !o.no_fallback;
  return c;
}

HttpClientOptions http_options(const Options& o) {
  HttpClientOptions h;
  h.timeout_ms = o.timeout_ms;
  return h;
}

std::shared_ptr<const Embedder> make_embedder(const Options& o) {
  if (o.embedder == "builtin") return std::make_shared<HashedTfidfEmbedder>(o.embed_dim);
  return make_shareable(std::make_shared<HttpEmbedder>(o.embedder, 0, http_options(o)));
}

std::unique_ptr<SpanBackend> make_backend(const Options& o) {
  if (o.backend.empty() || o.backend == "baseline") return nullptr;
  return std::make_unique<HttpSpanBackend>(o.backend, http_options(o));
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InputError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

bool looks_like_jsonl(const std::vector<std::string>& lines) {
  for (const auto& l : lines) {
    const auto p = l.find_first_not_of(" \t");
    if (p == std::string::npos) continue;
    return l[p] == '{';
  }
  return false;
}

std::vector<std::string> read_input_lines(const std::string& path) {
  if (path.empty() || path == "-") return read_lines(std::cin);
  return read_lines_file(path);
}

// A session or a labelled case list, whichever the input holds.
struct Workload {
  std::vector<FaultCase> cases;  // gold is empty when the input was a plain log
  bool labelled = false;
};

Workload load_workload(const std::string& path, const Options& o) {
  const auto lines = read_input_lines(path);
  Workload w;
  if (looks_like_jsonl(lines)) {
    std::vector<LogRecord> records;
    std::size_t line_no = 0;
    for (const auto& l : lines) {
      ++line_no;
      if (l.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(l);
      } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("invalid JSON: ") + e.what(), line_no);
      }
      try {
        if (j.contains("records")) {
          w.cases.push_back(fault_case_from_json(j));
          w.labelled = true;
        } else {
          records.push_back(record_from_json(j));
        }
      } catch (const InputError& e) {
        if (e.line()) throw;
        throw InputError(e.what(), line_no);
      }
    }
    if (!records.empty()) {
      FaultCase c;
      c.case_id = path.empty() || path == "-" ? "stdin" : path;
      c.session = make_session(std::move(records), {c.case_id, c.case_id, std::nullopt});
      w.cases.push_back(std::move(c));
    }
    return w;
  }
  const LinePattern pattern(o.pattern, o.ts_format);
  SkipReport skips;
  FaultCase c;
  c.case_id = path.empty() || path == "-" ? "stdin" : path;
  c.session = preprocess_session(lines, pattern, {c.case_id, c.case_id, std::nullopt}, &skips);
  for (const auto& [no, text] : skips.skipped) std::cerr << "skipped line " << no << ": " << text << "\n";
  w.cases.push_back(std::move(c));
  return w;
}

// Runs fn over [0, n) with up to `jobs` workers; results keep index order.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<R>> running;
  std::size_t next_out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    running.push_back(std::async(std::launch::async, fn, i));
    if (running.size() - next_out >= jobs) {
      out[next_out] = running[next_out].get();
      ++next_out;
    }
  }
  for (; next_out < n; ++next_out) out[next_out] = running[next_out].get();
  return out;
}

// ---------------------------------------------------------------------------

int cmd_preprocess(const Options& o, const std::vector<std::string>& inputs, const std::string& session_id,
                   std::optional<TimestampMs> window_start, std::optional<TimestampMs> window_end) {
  const LinePattern pattern(o.pattern, o.ts_format);
  Output out(o.output);
  for (const auto& path : inputs.empty() ? std::vector<std::string>{"-"} : inputs) {
    PreprocessOptions popts;
    popts.source = path == "-" ? "stdin" : path;
    popts.session_id = session_id.empty() ? popts.source : session_id;
    if (window_start && window_end) popts.window = TimeWindow{*window_start, *window_end};
    SkipReport skips;
    const auto session = preprocess_session(read_input_lines(path), pattern, popts, &skips);
    for (const auto& [no, text] : skips.skipped) std::cerr << popts.source << ":" << no << ": unparseable: " << text << "\n";
    for (const auto& r : session.records) write_jsonl_line(out.stream(), to_json(r));
  }
  return kExitOk;
}

int cmd_select(const Options& o, const std::string& input) {
  const auto work = load_workload(input, o);
  const auto embedder = make_embedder(o);
  const auto cfg = selection_config(o);
  const auto results = parallel_map(work.cases.size(), o.jobs, [&](std::size_t i) {
    return select_logs(work.cases[i].session, embedder.get(), cfg);
  });
  Output out(o.output);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& sel = results[i];
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& r : sel.candidates) candidates.push_back(to_json(r));
    nlohmann::json similar = nlohmann::json::array();
    for (const auto& r : sel.similar) similar.push_back(r.line_no);
    write_jsonl_line(out.stream(), {{"case_id", work.cases[i].case_id},
                                    {"session_size", sel.session_size},
                                    {"severe", sel.severe.size()},
                                    {"mild", sel.mild.size()},
                                    {"similar_line_nos", std::move(similar)},
                                    {"compression", sel.compression_ratio()},
                                    {"candidates", std::move(candidates)}});
  }
  return kExitOk;
}

int cmd_extract(const Options& o, const std::string& input) {
  const auto work = load_workload(input, o);
  const auto embedder = make_embedder(o);
  const auto backend = make_backend(o);
  const auto cfg = extract_config(o);
  const auto results = parallel_map(work.cases.size(), o.jobs, [&](std::size_t i) {
    return extract(work.cases[i].session, embedder.get(), backend.get(), cfg);
  });
  Output out(o.output);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& c = work.cases[i];
    auto j = to_json(results[i].info);
    j["case_id"] = c.case_id;
    j["window_start"] = c.session.window_start;
    j["window_end"] = c.session.window_end;
    j["degraded"] = results[i].degraded;
    j["n_session"] = results[i].selection.session_size;
    j["n_candidates"] = results[i].selection.candidates.size();
    write_jsonl_line(out.stream(), j);
    if (results[i].degraded) std::cerr << c.case_id << ": degraded to baseline: " << results[i].error << "\n";
  }
  return kExitOk;
}

int cmd_eval(const Options& o, const std::string& pred_path, const std::string& gold_path, const std::string& format,
             bool csv, const std::string& fip_policy) {
  const auto golds = load_dataset(gold_path);
  std::map<std::string, FaultInfo> by_id;
  std::map<TimestampMs, FaultInfo> by_window;
  {
    std::ifstream in(pred_path);
    if (!in) throw InputError("cannot open " + pred_path);
    std::size_t line_no = 0;
    for (const auto& j : read_jsonl(in)) {
      ++line_no;
      FaultInfo info;
      try {
        info = fault_info_from_json(j);
      } catch (const InputError& e) {
        throw InputError(pred_path + ": " + e.what(), line_no);
      }
      if (j.contains("case_id") && j["case_id"].is_string()) by_id[j["case_id"].get<std::string>()] = info;
      if (j.contains("window_start") && j["window_start"].is_number_integer())
        by_window[j["window_start"].get<TimestampMs>()] = info;
    }
  }

  const auto embedder = make_embedder(o);
  const auto cfg = selection_config(o);
  std::vector<FaultInfo> preds, gold_infos;
  std::vector<std::string> ids;
  std::size_t missing = 0;
  for (const auto& g : golds) {
    FaultInfo p;
    if (auto it = by_id.find(g.case_id); it != by_id.end()) p = it->second;
    else if (auto w = by_window.find(g.session.window_start); w != by_window.end()) p = w->second;
    else ++missing;
    preds.push_back(std::move(p));
    gold_infos.push_back(g.gold);
    ids.push_back(g.case_id);
  }
  const auto selections = parallel_map(golds.size(), o.jobs, [&](std::size_t i) {
    const auto& s = golds[i].session;
    return select_logs(make_session(s.records, {s.session_id, {}, TimeWindow{s.window_start, s.window_end}}),
                       embedder.get(), cfg);
  });
  MissingFipPolicy policy = MissingFipPolicy::Skip;
  if (fip_policy == "score-empty") policy = MissingFipPolicy::ScoreEmpty;
  else if (fip_policy != "skip") throw ConfigError("unknown --fip-policy '" + fip_policy + "'");

  const auto report = evaluate_dataset(preds, gold_infos, selections, policy, ids);
  if (missing) std::cerr << missing << " gold case(s) had no prediction; scored as empty\n";
  Output out(o.output);
  if (csv) out.stream() << to_csv(report);
  else if (format == "json") out.stream() << to_json(report).dump(2) << "\n";
  else if (format == "table") out.stream() << to_table(report);
  else throw ConfigError("unknown --format '" + format + "'");
  return kExitOk;
}

// Incrementally turns input lines (JSONL records or raw log text) into records.
class RecordReader {
 public:
  RecordReader(const LinePattern& pattern, std::string source) : pattern_(pattern), source_(std::move(source)) {}

  template <typename Sink>
  void feed(const std::string& line, Sink&& sink) {
    ++line_no_;
    const auto p = line.find_first_not_of(" \t\r");
    if (mode_ == Mode::Unknown && p != std::string::npos) mode_ = line[p] == '{' ? Mode::Json : Mode::Raw;
    if (mode_ == Mode::Json) {
      if (p == std::string::npos) return;
      try {
        sink(record_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("invalid JSON: ") + e.what(), line_no_);
      } catch (const InputError& e) {
        throw InputError(e.what(), line_no_);
      }
      return;
    }
    auto outcome = parse_line(line, pattern_, pending_ ? &*pending_ : nullptr, line_no_, source_);
    if (auto* rec = std::get_if<LogRecord>(&outcome)) {
      if (pending_) sink(std::move(*pending_));
      pending_ = std::move(*rec);
    } else if (auto* cont = std::get_if<Continuation>(&outcome)) {
      append_continuation(*pending_, cont->text);
    } else if (p != std::string::npos) {
      std::cerr << source_ << ":" << line_no_ << ": unparseable line skipped\n";
    }
  }

  template <typename Sink>
  void finish(Sink&& sink) {
    if (pending_) sink(std::move(*pending_));
    pending_.reset();
  }

 private:
  enum class Mode { Unknown, Json, Raw };
  const LinePattern& pattern_;
  std::string source_;
  Mode mode_ = Mode::Unknown;
  std::size_t line_no_ = 0;
  std::optional<LogRecord> pending_;
};

int cmd_online(const Options& o, const std::string& model_path, const std::string& input, bool follow,
               int idle_exit_ms, bool emit_all) {
  const auto model = load_anomaly_model(model_path);
  const auto embedder = make_embedder(o);
  const auto backend = make_backend(o);
  OnlineConfig cfg;
  cfg.window_ms = o.window_ms;
  cfg.extract = extract_config(o);
  cfg.jobs = o.jobs;
  cfg.emit_normal = emit_all;

  Output out(o.output);
  OnlinePipeline pipeline(model, embedder.get(), backend.get(), cfg, [&](const OnlineResult& r) {
    write_jsonl_line(out.stream(), to_json(r));
    out.stream().flush();
  });
  const LinePattern pattern(o.pattern, o.ts_format);
  RecordReader reader(pattern, input.empty() || input == "-" ? "stdin" : input);
  auto sink = [&](LogRecord r) { pipeline.push(std::move(r)); };

  if (input.empty() || input == "-") {
    std::string line;
    while (std::getline(std::cin, line)) reader.feed(line, sink);
  } else {
    std::ifstream in(input);
    if (!in) throw InputError("cannot open " + input);
    std::string line, partial;
    auto idle_since = std::chrono::steady_clock::now();
    for (;;) {
      if (std::getline(in, line)) {
        if (in.eof()) {  // no trailing newline yet: the writer may still be mid-line
          partial += line;
        } else {
          reader.feed(partial + line, sink);
          partial.clear();
          idle_since = std::chrono::steady_clock::now();
          continue;
        }
      }
      if (!follow) break;
      const auto idle = std::chrono::steady_clock::now() - idle_since;
      if (idle_exit_ms > 0 && idle >= std::chrono::milliseconds(idle_exit_ms)) break;
      in.clear();
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    if (!partial.empty()) reader.feed(partial, sink);
  }
  reader.finish(sink);
  pipeline.finish();
  const auto st = pipeline.stats();
  std::cerr << "sessions=" << st.sessions << " anomalous=" << st.anomalous << " extracted=" << st.extracted
            << " failures=" << st.failures << " late_drops=" << st.late_drops << "\n";
  return kExitOk;
}

int cmd_gen_corpus(const std::string& spec_path, std::optional<std::uint64_t> seed, std::optional<std::size_t> cases,
                   std::optional<std::size_t> train_cases, std::optional<std::size_t> normal,
                   std::optional<std::size_t> logs_per_session, const std::string& out_dir) {
  CorpusSpec spec = CorpusSpec::defaults();
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) throw InputError("cannot open " + spec_path);
    std::stringstream buf;
    buf << in.rdbuf();
    spec = parse_corpus_spec(buf.str());
  }
  if (seed) spec.seed = *seed;
  if (cases) spec.n_cases = *cases;
  if (train_cases) spec.n_train = *train_cases;
  if (normal) spec.n_normal = *normal;
  if (logs_per_session) spec.logs_per_session = *logs_per_session;
  const auto corpus = gen_corpus(spec);
  write_corpus(corpus, spec, out_dir);
  std::cerr << "wrote " << corpus.train.size() << " train, " << corpus.test.size() << " test, " << corpus.normal.size()
            << " normal sessions and " << corpus.stream.size() << " stream records to " << out_dir << "\n";
  return kExitOk;
}

int cmd_dt_train(const Options& o, const std::string& corpus_dir, std::string positive, std::string negative) {
  if (!corpus_dir.empty()) {
    if (positive.empty()) positive = corpus_dir + "/train.jsonl";
    if (negative.empty()) negative = corpus_dir + "/normal.jsonl";
  }
  if (positive.empty() || negative.empty()) throw ConfigError("dt-train needs --corpus or both --positive and --negative");
  std::vector<LogSession> pos;
  for (auto& c : load_dataset(positive)) pos.push_back(std::move(c.session));
  auto neg = load_sessions(negative);
  // Balanced classes: as many normal sessions as anomalous ones.
  if (neg.size() > pos.size()) neg.resize(pos.size());

  DrainParams dp{o.drain_depth, o.drain_sim, o.drain_max_children};
  DtParams tp{o.max_depth, o.min_samples_split, o.dt_seed};
  const auto model = train_anomaly_model(pos, neg, dp, tp);
  if (o.output.empty()) throw ConfigError("dt-train needs -o/--output");
  save_anomaly_model(model, o.output);

  std::size_t correct = 0;
  for (const auto& s : pos) correct += detect(model, s).anomalous ? 1 : 0;
  for (const auto& s : neg) correct += detect(model, s).anomalous ? 0 : 1;
  std::cerr << "templates=" << model.drain.templates().size() << " nodes=" << model.tree.nodes.size()
            << " train_accuracy=" << static_cast<double>(correct) / static_cast<double>(pos.size() + neg.size())
            << "\n";
  return kExitOk;
}

void add_ingest_flags(CLI::App* app, Options& o) {
  app->add_option("--pattern", o.pattern, "Line regex with named groups timestamp, level, content");
  app->add_option("--ts-format", o.ts_format, "Timestamp format (%Y-%m-%d %H:%M:%S style)");
}

void add_selection_flags(CLI::App* app, Options& o) {
  app->add_option("--selection", o.selection_mode, "combined | level | context | none");
  app->add_option("--ratio", o.ratio, "Share of mild logs kept by semantic selection")->check(CLI::Range(0.0, 1.0));
  app->add_option("--context-radius", o.context_radius, "Neighbours kept per severe log in context mode");
  app->add_option("--embedder", o.embedder, "builtin, or the URL of an embedding service");
  app->add_option("--embed-dim", o.embed_dim, "Dimension of the built-in embedder")->check(CLI::PositiveNumber);
  app->add_option("--jobs", o.jobs, "Cases processed concurrently")->check(CLI::PositiveNumber);
}

void add_extraction_flags(CLI::App* app, Options& o) {
  app->add_option("--backend", o.backend, "baseline, or the URL of a span-prediction service")
      ->envname("LOFI_BACKEND_URL");
  app->add_option("--max-tokens", o.max_tokens, "Packed input budget");
  app->add_option("--top-k", o.top_k, "Spans merged into each answer")->check(CLI::PositiveNumber);
  app->add_option("--max-span-len", o.max_span_len, "Longest span in tokens")->check(CLI::PositiveNumber);
  app->add_option("--baseline-words", o.baseline_words, "Words kept by the TF-IDF baseline");
  app->add_option("--fip-min-score", o.fip_min_score, "Report no FIP below this span score");
  app->add_flag("--no-fallback", o.no_fallback, "Fail instead of falling back to the baseline");
  app->add_option("--timeout-ms", o.timeout_ms, "Per-request timeout for remote services");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lofi - extract fault-indicating descriptions and parameters from logs"};
  app.set_config("--config", "", "INI/TOML file with option defaults; flags override it");
  app.require_subcommand(1);
  Options o;

  auto* pre = app.add_subcommand("preprocess", "Parse, window and deduplicate raw log lines into JSONL records");
  std::vector<std::string> pre_inputs;
  std::string session_id;
  std::optional<TimestampMs> window_start, window_end;
  pre->add_option("inputs", pre_inputs, "Log files (default: stdin)");
  pre->add_option("--session-id", session_id);
  pre->add_option("--window-start", window_start, "Epoch ms, inclusive");
  pre->add_option("--window-end", window_end, "Epoch ms, exclusive");
  pre->add_option("-o,--output", o.output);
  add_ingest_flags(pre, o);

  auto* sel = app.add_subcommand("select", "Run level + semantic log selection");
  std::string sel_input;
  sel->add_option("input", sel_input, "Raw log, record JSONL or case JSONL (default: stdin)");
  sel->add_option("-o,--output", o.output);
  add_ingest_flags(sel, o);
  add_selection_flags(sel, o);

  auto* ext = app.add_subcommand("extract", "Extract FID/FIP for each session or case");
  std::string ext_input;
  ext->add_option("input", ext_input, "Raw log, record JSONL or case JSONL (default: stdin)");
  ext->add_option("-o,--output", o.output);
  add_ingest_flags(ext, o);
  add_selection_flags(ext, o);
  add_extraction_flags(ext, o);

  auto* ev = app.add_subcommand("eval", "Score predictions against gold cases");
  std::string pred_path, gold_path, format = "table", fip_policy = "skip";
  bool csv = false;
  ev->add_option("--pred", pred_path, "Prediction JSONL (extract or online output)")->required();
  ev->add_option("--gold", gold_path, "Gold case JSONL")->required();
  ev->add_option("--format", format, "json | table");
  ev->add_flag("--csv", csv, "Emit per-example rows as CSV");
  ev->add_option("--fip-policy", fip_policy, "skip | score-empty");
  ev->add_option("-o,--output", o.output);
  add_selection_flags(ev, o);

  auto* onl = app.add_subcommand("online", "Detect anomalous windows in a log stream and extract them");
  std::string model_path, onl_input;
  bool emit_all = false;
  int idle_exit_ms = 0;
  onl->add_option("--model", model_path, "Detector model from dt-train")->required();
  onl->add_option("input", onl_input, "Record JSONL or raw log (default: stdin)");
  onl->add_option("--follow", onl_input, "Tail this file as it grows");
  onl->add_option("--idle-exit-ms", idle_exit_ms, "With --follow, stop after this long without new data (0 = never)");
  onl->add_option("--window-ms", o.window_ms, "Session window")->check(CLI::PositiveNumber);
  onl->add_flag("--all", emit_all, "Also emit windows judged normal");
  onl->add_option("-o,--output", o.output);
  add_ingest_flags(onl, o);
  add_selection_flags(onl, o);
  add_extraction_flags(onl, o);

  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic fault-injection corpus");
  std::string spec_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cases, train_cases, normal, logs_per_session;
  gen->add_option("--spec", spec_path, "key = value corpus spec file");
  gen->add_option("--seed", seed);
  gen->add_option("--cases", cases, "Test cases");
  gen->add_option("--train-cases", train_cases, "Training cases");
  gen->add_option("--normal", normal, "Normal sessions per role");
  gen->add_option("--logs-per-session", logs_per_session);
  gen->add_option("-o,--output", out_dir, "Output directory")->required();

  auto* dtt = app.add_subcommand("dt-train", "Train the template-count decision tree detector");
  std::string corpus_dir, positive, negative;
  dtt->add_option("--corpus", corpus_dir, "Directory with train.jsonl and normal.jsonl");
  dtt->add_option("--positive", positive, "Case JSONL of anomalous sessions");
  dtt->add_option("--negative", negative, "Session JSONL of normal sessions");
  dtt->add_option("--max-depth", o.max_depth);
  dtt->add_option("--min-samples-split", o.min_samples_split);
  dtt->add_option("--seed", o.dt_seed);
  dtt->add_option("--drain-depth", o.drain_depth);
  dtt->add_option("--drain-sim", o.drain_sim);
  dtt->add_option("--drain-max-children", o.drain_max_children);
  dtt->add_option("-o,--output", o.output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const bool online_follow = onl->count("--follow") > 0;
  try {
    if (*pre) return cmd_preprocess(o, pre_inputs, session_id, window_start, window_end);
    if (*sel) return cmd_select(o, sel_input);
    if (*ext) return cmd_extract(o, ext_input);
    if (*ev) return cmd_eval(o, pred_path, gold_path, format, csv, fip_policy);
    if (*onl) return cmd_online(o, model_path, onl_input, online_follow, idle_exit_ms, emit_all);
    if (*gen) return cmd_gen_corpus(spec_path, seed, cases, train_cases, normal, logs_per_session, out_dir);
    if (*dtt) return cmd_dt_train(o, corpus_dir, positive, negative);
  } catch (const BackendUnavailable& e) {
    std::cerr << "backend failure: " << e.what() << " (attempts=" << e.attempts() << ")\n";
    return kExitBackend;
  } catch (const NoEligibleSpan& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return kExitBackend;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
