#include <atomic>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "lofi/error.hpp"
#include "lofi/extraction.hpp"

using namespace lofi;

namespace {

// Builds a well-formed span response for `req`, with the answer peaked on tokens containing `needle`.
nlohmann::json fake_span_response(const nlohmann::json& req, const std::string& needle) {
  std::vector<LogRecord> logs;
  for (const auto& l : req.at("logs")) {
    LogRecord r;
    r.content = l.get<std::string>();
    logs.push_back(r);
  }
  const auto p = pack_input(req.at("question").get<std::string>(), logs, WhitespaceTokenizer{},
                            req.at("max_tokens").get<std::size_t>());
  nlohmann::json j;
  j["tokens"] = p.tokens;
  j["char_spans"] = nlohmann::json::array();
  for (const auto& [b, e] : p.char_spans) j["char_spans"].push_back({b, e});
  j["segment"] = nlohmann::json::array();
  for (const auto& s : p.segments) {
    auto seg = s;
    if (seg.kind == SegmentKind::Log) seg.log = static_cast<int>(p.packed_logs[seg.log]);
    j["segment"].push_back(to_string(seg));
  }
  std::vector<double> start(p.size(), 0.0), end(p.size(), 0.0);
  for (std::size_t t = 0; t < p.size(); ++t)
    if (p.segments[t].kind == SegmentKind::Log && p.tokens[t].find(needle) != std::string::npos) start[t] = end[t] = 12.0;
  j["start_logits"] = start;
  j["end_logits"] = end;
  return j;
}

class FakeServer {
 public:
  std::atomic<int> requests{0};
  std::string mode = "ok";

  FakeServer() {
    server_.Post("/span", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (...) {
        res.status = 400;
        res.set_content(R"({"error":"bad json"})", "application/json");
        return;
      }
      const std::string needle = body.at("question").get<std::string>().find("parameters") != std::string::npos
                                     ? "ServicePath"
                                     : "creating";
      auto out = fake_span_response(body, needle);
      if (mode == "status500") {
        res.status = 500;
        return;
      }
      if (mode == "status400") {
        res.status = 400;
        return;
      }
      if (mode == "not-json") {
        res.set_content("<html>", "text/html");
        return;
      }
      if (mode == "missing-field") out.erase("end_logits");
      if (mode == "short-logits") out["start_logits"].erase(0);
      if (mode == "bad-segment") out["segment"][1] = "BODY";
      if (mode == "bad-offsets") out["char_spans"][1] = {500, 400};
      if (mode == "all-special") {
        for (auto& s : out["segment"]) s = "SEP";
      }
      res.set_content(out.dump(), "application/json");
    });
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      const auto body = nlohmann::json::parse(req.body);
      const auto texts = body.at("texts").get<std::vector<std::string>>();
      const auto vecs = HashedTfidfEmbedder(64).embed_batch(texts);
      nlohmann::json out;
      out["dim"] = 64;
      out["vectors"] = nlohmann::json::array();
      for (const auto& v : vecs) out["vectors"].push_back(v.values);
      if (mode == "short-batch") out["vectors"].erase(0);
      if (mode == "wrong-dim") out["dim"] = 65;
      res.set_content(out.dump(), "application/json");
    });
    server_.new_task_queue = [] { return new httplib::ThreadPool(32); };
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

HttpClientOptions fast() {
  HttpClientOptions o;
  o.timeout_ms = 2000;
  o.max_attempts = 2;
  o.backoff_ms = 1;
  return o;
}

LogSession bean_session() {
  LogSession s;
  const std::vector<std::pair<LogLevel, std::string>> lines = {
      {LogLevel::Info, "Starting service registry"},
      {LogLevel::Error, "Error creating bean with name ServicePath5"},
      {LogLevel::Info, "Registered bean ServicePath5 in context"},
      {LogLevel::Info, "Heartbeat ok"},
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    LogRecord r;
    r.timestamp = static_cast<TimestampMs>(i) * 10;
    r.level = lines[i].first;
    r.content = r.raw = lines[i].second;
    r.line_no = i + 1;
    s.records.push_back(r);
  }
  s.window_end = 100;
  return s;
}

}  // namespace

TEST_CASE("span wire request format") {
  const SpanRequest req{"q?", {"a b", "c"}, 512};
  const auto j = to_json(req);
  CHECK(j.dump() == R"({"logs":["a b","c"],"max_tokens":512,"question":"q?"})");
  CHECK(packed_source_text("q?", req.logs) == "q?\na b\nc");
}

TEST_CASE("HTTP span backend end to end") {
  FakeServer server;
  HttpSpanBackend backend(server.url("/span"), fast());
  const HashedTfidfEmbedder e;
  const auto r = extract(bean_session(), &e, &backend);
  CHECK_FALSE(r.degraded);
  CHECK(r.info.fid.find("creating") != std::string::npos);
  REQUIRE(r.info.fip.has_value());
  CHECK(r.info.fip->find("ServicePath5") != std::string::npos);
  CHECK(server.requests == 2);
  REQUIRE(!r.info.fid_spans.empty());
  CHECK(r.info.fid_spans.front().score > 0.5);

  ExtractConfig strict;
  strict.fip_min_score = 2.0;  // no span can score above 1
  CHECK_FALSE(extract(bean_session(), &e, &backend, strict).info.fip.has_value());
}

TEST_CASE("LOG indices in responses refer to the request's logs") {
  const SpanRequest req{"q", {"zero", "one two", "three"}, 512};
  nlohmann::json body;
  body["tokens"] = {"[CLS]", "q", "[SEP]", "one", "two", "[SEP]"};
  body["char_spans"] = {{0, 0}, {0, 1}, {1, 1}, {7, 10}, {11, 14}, {14, 14}};
  body["segment"] = {"CLS", "QUESTION", "SEP", "LOG(1)", "LOG(1)", "SEP"};
  body["start_logits"] = {0, 0, 0, 1, 0, 0};
  body["end_logits"] = {0, 0, 0, 0, 1, 0};
  const auto res = parse_span_response(body, req);
  CHECK(res.packed.packed_logs == std::vector<std::size_t>{1});
  CHECK(res.packed.dropped_logs == std::vector<std::size_t>{0, 2});
  CHECK(res.packed.segments[3] == Segment{SegmentKind::Log, 0});
  const auto spans = select_spans(res.logits, res.packed, 1);
  CHECK(render_answer(spans, res.packed) == "one two");

  body["segment"][3] = "LOG(7)";
  CHECK_THROWS_AS(parse_span_response(body, req), BackendUnavailable);
}

TEST_CASE("protocol violations fall back to the baseline or fail with --no-fallback") {
  FakeServer server;
  HttpSpanBackend backend(server.url("/span"), fast());
  const HashedTfidfEmbedder e;
  ExtractConfig no_fallback;
  no_fallback.allow_fallback = false;
  const auto baseline = extract(bean_session(), &e, nullptr);

  for (const std::string mode : {"missing-field", "short-logits", "bad-segment", "bad-offsets", "not-json", "status500",
                                 "status400", "all-special"}) {
    CAPTURE(mode);
    server.mode = mode;
    const auto r = extract(bean_session(), &e, &backend);
    CHECK(r.degraded);
    CHECK_FALSE(r.error.empty());
    CHECK(r.info.fid == baseline.info.fid);
    CHECK_THROWS_AS(extract(bean_session(), &e, &backend, no_fallback), Error);
  }
}

TEST_CASE("unreachable backend reports retry metadata") {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  JsonPostClient client("http://127.0.0.1:" + std::to_string(port) + "/span", fast());
  try {
    client.post({{"x", 1}});
    FAIL("expected BackendUnavailable");
  } catch (const BackendUnavailable& e) {
    CHECK(e.attempts() == 2);
    CHECK(e.last_status() == -1);
  }
  CHECK_THROWS_AS(JsonPostClient("https://example.invalid/x"), ConfigError);
  CHECK_THROWS_AS(JsonPostClient("no-scheme"), ConfigError);
}

TEST_CASE("HTTP embedder matches the wire protocol") {
  FakeServer server;
  HttpEmbedder remote(server.url("/embed"), 0, fast());
  const std::vector<std::string> texts = {"read timed out host A", "heartbeat ok"};
  const auto got = remote.embed_batch(texts);
  const auto want = HashedTfidfEmbedder(64).embed_batch(texts);
  REQUIRE(got.size() == 2);
  CHECK(got[0].values == want[0].values);
  CHECK(remote.dim() == 64);

  server.mode = "short-batch";
  CHECK_THROWS_AS(remote.embed_batch(texts), BackendUnavailable);
  server.mode = "wrong-dim";
  CHECK_THROWS_AS(remote.embed_batch(texts), BackendUnavailable);
}

TEST_CASE("32 concurrent requests go through one client") {
  FakeServer server;
  HttpClientOptions o = fast();
  o.max_in_flight = 32;
  HttpSpanBackend backend(server.url("/span"), o);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 32; ++t)
    threads.emplace_back([&] {
      const SpanRequest req{"what is creating?", {"Error creating bean"}, 512};
      try {
        const auto res = backend.query(req);
        if (res.packed.size() == res.logits.start.size()) ++ok;
      } catch (const Error&) {
      }
    });
  for (auto& t : threads) t.join();
  CHECK(ok == 32);
}
