#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lofi/corpus.hpp"
#include "lofi/error.hpp"
#include "lofi/json_io.hpp"

using namespace lofi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("lofi_corpus_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("same seed gives identical files") {
  const auto spec = CorpusSpec::defaults();
  const auto a = scratch("a"), b = scratch("b");
  write_corpus(gen_corpus(spec), spec, a.string());
  write_corpus(gen_corpus(spec), spec, b.string());
  for (const auto* f : {"train.jsonl", "test.jsonl", "normal.jsonl", "stream.jsonl", "stream.log", "fault_windows.jsonl",
                        "corpus.spec"}) {
    CAPTURE(f);
    const auto x = slurp(a / f);
    CHECK(!x.empty());
    CHECK(x == slurp(b / f));
  }
  auto other = spec;
  other.seed = 8;
  const auto c = scratch("c");
  write_corpus(gen_corpus(other), other, c.string());
  CHECK(slurp(a / "test.jsonl") != slurp(c / "test.jsonl"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("corpus shape") {
  const auto spec = CorpusSpec::defaults();
  const auto corpus = gen_corpus(spec);
  CHECK(corpus.test.size() == 16);
  CHECK(corpus.train.size() == 32);
  CHECK(corpus.normal.size() == 32);
  CHECK(corpus.fault_windows.size() == 16);

  double total = 0;
  std::size_t sessions = 0;
  for (const auto* set : {&corpus.train, &corpus.test}) {
    for (const auto& c : *set) {
      CHECK_FALSE(check_fault_case(c).has_value());
      CHECK_FALSE(check_session(c.session).has_value());
      CHECK(c.session.window_end - c.session.window_start == spec.window_ms);
      total += static_cast<double>(c.session.size());
      ++sessions;
    }
  }
  const double mean = total / static_cast<double>(sessions);
  CHECK(mean >= 0.8 * 40);
  CHECK(mean <= 1.2 * 40);
  for (std::size_t i = 1; i < corpus.stream.size(); ++i) CHECK_FALSE(time_order(corpus.stream[i], corpus.stream[i - 1]));
}

TEST_CASE("bean profile records the drawn ServicePath") {
  auto spec = CorpusSpec::defaults();
  spec = parse_corpus_spec("seed = 7\nn_cases = 4\nn_train = 2\nprofiles = bean-creation\n");
  const auto corpus = gen_corpus(spec);
  for (const auto& c : corpus.test) {
    REQUIRE(c.gold.fip.has_value());
    CHECK(c.gold.fid == "Error creating bean");
    CHECK(c.gold.fip->rfind("ServicePath", 0) == 0);
    const auto k = c.gold.fip->substr(11);
    CHECK(k.size() == 1);
    CHECK(k[0] >= '1');
    CHECK(k[0] <= '9');
    bool found = false;
    for (const auto& r : c.session.records)
      found = found || (r.level == LogLevel::Error && r.content.find("Error creating bean") != std::string::npos &&
                        r.content.find(*c.gold.fip) != std::string::npos);
    CHECK(found);
    CHECK(c.gold.fip_subtype == FipSubtype::ComponentId);
  }
}

TEST_CASE("spec parsing and infeasible specs") {
  const auto spec = parse_corpus_spec("# comment\nseed=3\nlogs_per_session = 50\nplant_echo = false\nprofiles = all\n");
  CHECK(spec.seed == 3);
  CHECK(spec.logs_per_session == 50);
  CHECK_FALSE(spec.plant_echo);
  CHECK(spec.profiles.size() == default_fault_profiles().size());
  CHECK(parse_corpus_spec(format_corpus_spec(spec)).logs_per_session == 50);

  CHECK_THROWS_AS(parse_corpus_spec("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_corpus_spec("profiles = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_corpus_spec("seed\n"), ConfigError);

  auto tiny = CorpusSpec::defaults();
  tiny.logs_per_session = 5;  // a 3-line burst cannot fit in 4 lines
  CHECK_THROWS_AS(gen_corpus(tiny), ConfigError);
  auto narrow = CorpusSpec::defaults();
  narrow.window_ms = 10;
  CHECK_THROWS_AS(gen_corpus(narrow), ConfigError);
}

TEST_CASE("71-case spec") {
  auto spec = CorpusSpec::defaults();
  spec.n_cases = 71;
  const auto corpus = gen_corpus(spec);
  CHECK(corpus.test.size() == 71);
}

TEST_CASE("dataset save/load") {
  auto spec = CorpusSpec::defaults();
  spec.n_cases = 20;
  const auto cases = gen_corpus(spec).test;
  const auto dir = scratch("io");
  fs::create_directories(dir);
  const auto path = (dir / "cases.jsonl").string();
  save_dataset(cases, path);
  const auto back = load_dataset(path);
  REQUIRE(back.size() == cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CHECK(back[i].case_id == cases[i].case_id);
    CHECK(back[i].session.records == cases[i].session.records);
    CHECK(back[i].session.window_start == cases[i].session.window_start);
    CHECK(back[i].gold.fid == cases[i].gold.fid);
    CHECK(back[i].gold.fip == cases[i].gold.fip);
    CHECK(back[i].gold.fid_subtype == cases[i].gold.fid_subtype);
    CHECK(back[i].fault_kind == cases[i].fault_kind);
  }

  // Line 17 broken.
  {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    lines[16] = "{\"case_id\": \"x\", \"records\": [";
    std::ofstream out(path);
    for (const auto& l : lines) out << l << "\n";
  }
  try {
    load_dataset(path);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(e.line() == 17);
    CHECK(std::string(e.what()).find("17") != std::string::npos);
  }

  // Schema errors name the line too.
  {
    std::ofstream out(path);
    out << to_json(cases[0]).dump() << "\n" << R"({"case_id":"y","records":[],"gold":{"fid":"a"}})" << "\n";
  }
  try {
    load_dataset(path);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(e.line() == 2);
  }

  // Optional fip may be missing entirely.
  {
    auto j = to_json(cases[0]);
    j["gold"].erase("fip");
    j["gold"].erase("fip_subtype");
    std::ofstream out(path);
    out << j.dump() << "\n";
  }
  const auto no_fip = load_dataset(path);
  REQUIRE(no_fip.size() == 1);
  CHECK_FALSE(no_fip[0].gold.fip.has_value());
  fs::remove_all(dir);
}

TEST_CASE("subtype vocabularies") {
  CHECK(parse_fid_subtype("error_message") == FidSubtype::ErrorMessage);
  CHECK(parse_fip_subtype("address") == FipSubtype::Address);
  CHECK(to_string(FidSubtype::WrongStatus) == "wrong_status");
  CHECK_THROWS_AS(parse_fid_subtype("other"), InputError);
  CHECK_THROWS_AS(parse_fip_subtype("host"), InputError);
}
