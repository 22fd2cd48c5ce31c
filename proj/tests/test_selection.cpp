#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "lofi/selection.hpp"

using namespace lofi;

namespace {

// Looks texts up in a table; `factor` rescales every vector.
class TableEmbedder final : public Embedder {
 public:
  std::map<std::string, std::vector<double>> table;
  double factor = 1.0;
  std::size_t dim() const override { return 2; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
    std::vector<EmbeddingVector> out;
    for (const auto& t : texts) {
      auto v = table.at(t);
      for (auto& x : v) x *= factor;
      out.push_back({v});
    }
    return out;
  }
};

LogRecord rec(TimestampMs ts, LogLevel level, std::string content, std::size_t line_no) {
  LogRecord r;
  r.timestamp = ts;
  r.level = level;
  r.content = std::move(content);
  r.raw = r.content;
  r.line_no = line_no;
  return r;
}

LogSession session_of(const std::vector<LogLevel>& levels) {
  LogSession s;
  for (std::size_t i = 0; i < levels.size(); ++i)
    s.records.push_back(rec(static_cast<TimestampMs>(i) * 100, levels[i], "line " + std::to_string(i), i + 1));
  s.window_end = static_cast<TimestampMs>(levels.size()) * 100;
  return s;
}

// Severe record "sev" at (1, 0); mild record "m<score>" at angle acos(score).
TableEmbedder score_fixture(const std::vector<double>& scores) {
  TableEmbedder e;
  e.table["sev"] = {1.0, 0.0};
  for (double s : scores) e.table["m" + std::to_string(s)] = {s, std::sqrt(1.0 - s * s)};
  return e;
}

}  // namespace

TEST_CASE("split_by_level keeps the highest level present") {
  using L = LogLevel;
  auto split = split_by_level(session_of({L::Info, L::Error, L::Info, L::Error}));
  CHECK(split.severe.size() == 2);
  CHECK(split.severe[0].line_no == 2);
  CHECK(split.severe[1].line_no == 4);
  CHECK(split.mild.size() == 2);

  split = split_by_level(session_of({L::Info, L::Info}));
  CHECK(split.severe.size() == 2);
  CHECK(split.mild.empty());

  split = split_by_level(session_of({L::Warn, L::Fatal, L::Error}));
  REQUIRE(split.severe.size() == 1);
  CHECK(split.severe[0].level == L::Fatal);
}

TEST_CASE("similar_count rounds up") {
  CHECK(similar_count(0) == 0);
  CHECK(similar_count(1) == 1);
  CHECK(similar_count(10) == 1);
  CHECK(similar_count(11) == 2);
  CHECK(similar_count(20) == 2);
  CHECK(similar_count(36) == 4);
  CHECK(similar_count(100) == 10);
  CHECK(similar_count(5, 0.5) == 3);
}

TEST_CASE("built-in embedder fixture") {
  const HashedTfidfEmbedder e;
  const auto a = embed("read timed out host A", e);
  const auto b = embed("read timed out host B", e);
  const auto hb = embed("heartbeat ok", e);
  CHECK(a.dim() == 1024);
  CHECK(embed("read timed out host A", e).values == a.values);
  // Frozen from tests/oracles/frozen_values.py (single-text embeddings, IDF = 1).
  CHECK(cosine(a.values, b.values) == doctest::Approx(0.90909090909090873).epsilon(1e-12));
  CHECK(cosine(a.values, hb.values) == doctest::Approx(0.0));
  CHECK(cosine(a.values, b.values) > cosine(a.values, hb.values));

  const std::vector<std::string> batch = {"read timed out host A", "read timed out host B", "heartbeat ok"};
  const auto v = e.embed_batch(batch);
  CHECK(cosine(v[0].values, v[1].values) == doctest::Approx(0.85259422123057804).epsilon(1e-12));
  CHECK(cosine(v[0].values, v[2].values) == doctest::Approx(0.0));

  CHECK(HashedTfidfEmbedder::fnv1a("w:read") == 6853555374179975704ull);
  CHECK(HashedTfidfEmbedder::features("Ab") == std::vector<std::string>{"w:ab", "c: ab", "c:ab "});
}

TEST_CASE("cosine edge cases") {
  const std::vector<double> z = {0.0, 0.0}, x = {1.0, 0.0}, y = {-2.0, 0.0};
  CHECK(cosine(z, x) == 0.0);
  CHECK(cosine(x, y) == doctest::Approx(-1.0));
  CHECK(cosine(x, x) == doctest::Approx(1.0));
}

TEST_CASE("semantic selection picks the best-scoring mild record") {
  const std::vector<double> scores = {0.5, 0.9, 0.1, 0.0, 0.2, 0.3, 0.05, 0.15, 0.25, 0.35};
  const auto e = score_fixture(scores);
  std::vector<LogRecord> mild;
  for (std::size_t i = 0; i < scores.size(); ++i) mild.push_back(rec(static_cast<TimestampMs>(i), LogLevel::Info, "m" + std::to_string(scores[i]), i + 2));
  auto r = semantic_select({rec(100, LogLevel::Error, "sev", 1)}, mild, e);
  REQUIRE(r.similar.size() == 1);
  CHECK(r.similar[0].content == "m" + std::to_string(0.9));
  REQUIRE(r.mild_scores.size() == 10);
  CHECK(r.mild_scores[1] == doctest::Approx(0.9));
  REQUIRE(r.candidates.size() == 2);
  CHECK(r.candidates[0].content == "m" + std::to_string(0.9));  // earlier timestamp first
  CHECK(r.candidate_rank == std::vector<int>{0, -1});
}

TEST_CASE("empty mild set") {
  const auto e = score_fixture({});
  auto r = semantic_select({rec(0, LogLevel::Error, "sev", 1)}, {}, e);
  CHECK(r.similar.empty());
  CHECK(r.candidates.size() == 1);
}

TEST_CASE("ties break on timestamp then line number") {
  const auto e = score_fixture({0.5});
  const auto m = "m" + std::to_string(0.5);
  std::vector<LogRecord> mild = {rec(20, LogLevel::Info, m, 9), rec(10, LogLevel::Info, m, 8), rec(10, LogLevel::Info, m, 3)};
  for (int i = 0; i < 8; ++i) mild.push_back(rec(30 + i, LogLevel::Info, m, 20 + i));
  // 11 mild -> 2 similar
  auto r = semantic_select({rec(0, LogLevel::Error, "sev", 1)}, mild, e);
  REQUIRE(r.similar.size() == 2);
  CHECK(r.similar[0].line_no == 3);
  CHECK(r.similar[1].line_no == 8);
}

TEST_CASE("select_logs modes") {
  using L = LogLevel;
  std::vector<L> levels(40, L::Info);
  levels[3] = levels[10] = levels[22] = levels[39] = L::Error;
  const auto s = session_of(levels);
  const HashedTfidfEmbedder e;

  auto r = select_logs(s, &e);
  CHECK(r.severe.size() == 4);
  CHECK(r.similar.size() == 4);
  CHECK(r.candidates.size() == 8);
  CHECK(r.session_size == 40);
  CHECK(r.compression_ratio() == doctest::Approx(0.2));
  for (std::size_t i = 1; i < r.candidates.size(); ++i) CHECK(time_order(r.candidates[i - 1], r.candidates[i]));

  SelectionConfig level_only{SelectionMode::LevelOnly};
  r = select_logs(s, nullptr, level_only);
  CHECK(r.candidates.size() == 4);

  SelectionConfig context{SelectionMode::LevelContext};
  r = select_logs(s, nullptr, context);
  CHECK(r.candidates.size() == 11);  // 2,3,4 9,10,11 21,22,23 38,39

  SelectionConfig none{SelectionMode::None};
  CHECK(select_logs(s, nullptr, none).candidates.size() == 40);

  const auto flat = session_of(std::vector<L>(6, L::Warn));
  CHECK(select_logs(flat, &e).candidates.size() == 6);

  CHECK_THROWS(select_logs(s, nullptr));  // combined mode needs an embedder
}

TEST_CASE("scale invariance") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    TableEmbedder e;
    e.table["sev"] = {u(rng), u(rng)};
    std::vector<LogRecord> mild;
    for (int i = 0; i < 25; ++i) {
      const auto name = "m" + std::to_string(i);
      e.table[name] = {u(rng), u(rng)};
      mild.push_back(rec(i, LogLevel::Info, name, static_cast<std::size_t>(i) + 2));
    }
    const auto base = semantic_select({rec(50, LogLevel::Error, "sev", 1)}, mild, e);
    e.factor = 7.25;
    const auto scaled = semantic_select({rec(50, LogLevel::Error, "sev", 1)}, mild, e);
    REQUIRE(base.similar.size() == scaled.similar.size());
    for (std::size_t i = 0; i < base.similar.size(); ++i) CHECK(base.similar[i] == scaled.similar[i]);
    for (std::size_t i = 0; i < base.mild_scores.size(); ++i)
      CHECK(std::abs(base.mild_scores[i] - scaled.mild_scores[i]) <= 1e-9);
  }
}

TEST_CASE("adding a low-scoring mild record keeps earlier picks") {
  std::vector<double> scores = {0.95, 0.9, 0.85, 0.4, 0.3, 0.2, 0.1, 0.05, 0.3, 0.2, 0.1, 0.15, 0.12, 0.11, 0.13};
  scores.push_back(0.01);
  const auto e = score_fixture(scores);
  std::vector<LogRecord> mild;
  for (std::size_t i = 0; i + 1 < scores.size(); ++i)
    mild.push_back(rec(static_cast<TimestampMs>(i), LogLevel::Info, "m" + std::to_string(scores[i]), i + 2));
  const auto before = semantic_select({rec(99, LogLevel::Error, "sev", 1)}, mild, e);
  mild.push_back(rec(50, LogLevel::Info, "m" + std::to_string(0.01), 60));
  const auto after = semantic_select({rec(99, LogLevel::Error, "sev", 1)}, mild, e);
  CHECK(after.similar.size() >= before.similar.size());
  for (const auto& r : before.similar) CHECK(std::find(after.similar.begin(), after.similar.end(), r) != after.similar.end());
}
