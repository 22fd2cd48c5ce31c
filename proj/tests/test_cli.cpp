#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + LOFI_CLI_PATH + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

// Shared corpus directory, generated once.
const fs::path& corpus_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "lofi_cli_corpus";
    fs::remove_all(d);
    const auto r = run("gen-corpus --seed 7 --cases 16 -o " + d.string());
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (corpus_dir() / name).string(); }

}  // namespace

TEST_CASE("cli: extract with the baseline backend") {
  const auto r = run("extract --backend baseline " + path("test.jsonl"));
  CHECK(r.code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 16);
  const auto j = nlohmann::json::parse(lines[0]);
  CHECK(j.contains("fid"));
  CHECK(j.contains("fip"));
  CHECK(j.at("case_id") == "test-0000");
  CHECK(j.at("degraded") == false);

  const auto threaded = run("extract --jobs 4 " + path("test.jsonl"));
  CHECK(threaded.out == r.out);
}

TEST_CASE("cli: eval formats") {
  const auto pred = (corpus_dir() / "pred.jsonl").string();
  REQUIRE(run("extract " + path("test.jsonl") + " -o " + pred).code == 0);
  const auto table = run("eval --pred " + pred + " --gold " + path("test.jsonl"));
  CHECK(table.code == 0);
  CHECK(table.out.find("FID") != std::string::npos);
  CHECK(table.out.find("selection_accuracy") != std::string::npos);

  const auto js = run("eval --pred " + pred + " --gold " + path("test.jsonl") + " --format json");
  CHECK(js.code == 0);
  const auto report = nlohmann::json::parse(js.out);
  CHECK(report.at("n_examples") == 16);
  CHECK(report.at("fid").at("f1").get<double>() > 0.0);
  CHECK(report.at("compression_ratio").get<double>() > 0.0);
  CHECK(report.at("compression_ratio").get<double>() <= 1.0);

  const auto csv = run("eval --pred " + pred + " --gold " + path("test.jsonl") + " --csv");
  CHECK(lines_of(csv.out).size() == 17);

  CHECK(run("eval --pred " + pred + " --gold " + path("test.jsonl") + " --format yaml").code == 1);
}

TEST_CASE("cli: exit codes") {
  CHECK(run("extract --bogus-flag x").code == 64);
  CHECK(run("frobnicate").code == 64);
  CHECK(run("").code == 64);
  CHECK(run("--help").code == 0);
  CHECK(run("extract /nonexistent/file.jsonl").code == 1);
  CHECK(run("eval --pred /nonexistent --gold " + path("test.jsonl")).code == 1);

  const std::string dead = "http://127.0.0.1:9/span";
  CHECK(run("extract --timeout-ms 200 --no-fallback --backend " + dead + " " + path("test.jsonl")).code == 2);
  const auto fallback = run("extract --timeout-ms 200 --backend " + dead + " " + path("test.jsonl"));
  CHECK(fallback.code == 0);
  CHECK(nlohmann::json::parse(lines_of(fallback.out).at(0)).at("degraded") == true);
}

TEST_CASE("cli: environment and config file precedence") {
  const std::string env = "LOFI_BACKEND_URL=http://127.0.0.1:9/span";
  CHECK(run("extract --timeout-ms 200 --no-fallback " + path("test.jsonl"), env).code == 2);
  CHECK(run("extract --no-fallback --backend baseline " + path("test.jsonl"), env).code == 0);

  const auto cfg = corpus_dir() / "lofi.ini";
  {
    std::ofstream out(cfg);
    out << "[extract]\nbaseline-words = 2\n";
  }
  const auto two = run("--config " + cfg.string() + " extract " + path("test.jsonl"));
  REQUIRE(two.code == 0);
  const auto fid2 = nlohmann::json::parse(lines_of(two.out).at(0)).at("fid").get<std::string>();
  CHECK(std::count(fid2.begin(), fid2.end(), ' ') == 1);

  const auto three = run("--config " + cfg.string() + " extract --baseline-words 3 " + path("test.jsonl"));
  const auto fid3 = nlohmann::json::parse(lines_of(three.out).at(0)).at("fid").get<std::string>();
  CHECK(std::count(fid3.begin(), fid3.end(), ' ') == 2);
}

TEST_CASE("cli: detector training and online follow mode") {
  const auto model = (corpus_dir() / "dt.json").string();
  REQUIRE(run("dt-train --corpus " + corpus_dir().string() + " -o " + model).code == 0);
  const auto j = nlohmann::json::parse(std::ifstream(model));
  CHECK(j.at("version") == 1);
  CHECK(j.contains("vocab"));
  CHECK(j.contains("tree"));

  const auto windows = lines_of(run("online --model " + model + " " + path("stream.jsonl")).out);
  const auto truth = lines_of([] {
    std::ifstream in(path("fault_windows.jsonl"));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }());
  REQUIRE(windows.size() == truth.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto w = nlohmann::json::parse(windows[i]);
    CHECK(w.at("anomalous") == true);
    CHECK(w.at("window_start") == nlohmann::json::parse(truth[i]).at("window_start"));
  }

  const auto raw = run("online --model " + model + " --follow " + path("stream.log") + " --idle-exit-ms 300");
  CHECK(raw.code == 0);
  CHECK(lines_of(raw.out) == windows);

  const auto all = lines_of(run("online --all --model " + model + " " + path("stream.jsonl")).out);
  CHECK(all.size() > windows.size());
}

TEST_CASE("cli: preprocess and select") {
  const auto log = corpus_dir() / "app.log";
  {
    std::ofstream out(log);
    out << "2023-03-01 10:00:01 INFO Starting executor\n"
           "2023-03-01 10:00:02 ERROR Error creating bean ServicePath5\n"
           "    at com.foo.Bar(Bar.java:42)\n"
           "2023-03-01 10:00:03 INFO Starting executor\n"
           "2023-03-01 10:00:04 INFO Registered ServicePath5\n";
  }
  const auto pre = run("preprocess " + log.string());
  CHECK(pre.code == 0);
  const auto recs = lines_of(pre.out);
  REQUIRE(recs.size() == 3);
  const auto second = nlohmann::json::parse(recs[1]);
  CHECK(second.at("level") == "ERROR");
  CHECK(second.at("content") == "Error creating bean ServicePath5\n    at com.foo.Bar(Bar.java:42)");
  CHECK(second.at("line_no") == 2);

  const auto sel = run("select " + log.string());
  CHECK(sel.code == 0);
  const auto s = nlohmann::json::parse(lines_of(sel.out).at(0));
  CHECK(s.at("severe") == 1);
  CHECK(s.at("mild") == 2);
  CHECK(s.at("candidates").size() == 2);

  const auto ext = run("extract " + log.string());
  CHECK(ext.code == 0);
  CHECK(lines_of(ext.out).size() == 1);

  const auto bad = corpus_dir() / "bad.log";
  {
    std::ofstream out(bad);
    out << "nothing parseable here\n";
  }
  CHECK(run("preprocess " + bad.string()).code == 1);
}
