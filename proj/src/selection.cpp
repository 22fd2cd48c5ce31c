#include "lofi/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lofi/error.hpp"
#include "lofi/kernels.hpp"

namespace lofi {

namespace {

// Copies vectors into a row-major matrix with unit-norm rows (zero rows stay zero).
std::vector<double> normalized_rows(const std::vector<EmbeddingVector>& vecs, std::size_t begin,
                                    std::size_t end, std::size_t dim) {
  std::vector<double> m((end - begin) * dim, 0.0);
  for (std::size_t r = begin; r < end; ++r) {
    const auto& v = vecs[r].values;
    if (v.size() != dim) throw std::logic_error("embedding dimension mismatch");
    const double norm = std::sqrt(kernels::dot(v, v));
    if (norm > 0.0) kernels::scale(v, 1.0 / norm, std::span<double>(m.data() + (r - begin) * dim, dim));
  }
  return m;
}

void merge_candidates(SelectionResult& res) {
  struct Item {
    const LogRecord* rec;
    int rank;
  };
  std::vector<Item> items;
  items.reserve(res.severe.size() + res.similar.size());
  for (const auto& r : res.severe) items.push_back({&r, -1});
  for (std::size_t i = 0; i < res.similar.size(); ++i) items.push_back({&res.similar[i], static_cast<int>(i)});
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return time_order(*a.rec, *b.rec); });
  res.candidates.clear();
  res.candidate_rank.clear();
  for (const auto& it : items) {
    res.candidates.push_back(*it.rec);
    res.candidate_rank.push_back(it.rank);
  }
}

}  // namespace

LevelSplit split_by_level(const LogSession& session) {
  LevelSplit out;
  if (session.records.empty()) return out;
  int best = kLevelCount;
  for (const auto& r : session.records) best = std::min(best, rank(r.level));
  for (const auto& r : session.records) (rank(r.level) == best ? out.severe : out.mild).push_back(r);
  return out;
}

std::size_t similar_count(std::size_t n_mild, double ratio) noexcept {
  if (n_mild == 0) return 0;
  // The epsilon absorbs representation error, e.g. 0.1 * 30 = 3.0000000000000004.
  const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n_mild) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n_mild);
}

SelectionResult semantic_select(std::vector<LogRecord> severe, std::vector<LogRecord> mild,
                                const Embedder& embedder, double ratio) {
  if (severe.empty()) throw std::invalid_argument("semantic_select: severe set is empty");
  SelectionResult res;
  res.session_size = severe.size() + mild.size();
  res.severe = std::move(severe);
  res.mild = std::move(mild);

  if (!res.mild.empty()) {
    std::vector<std::string> texts;
    texts.reserve(res.session_size);
    for (const auto& r : res.severe) texts.push_back(r.content);
    for (const auto& r : res.mild) texts.push_back(r.content);
    const auto vecs = embedder.embed_batch(texts);
    if (vecs.size() != texts.size()) throw std::logic_error("embedder returned wrong vector count");
    const std::size_t dim = vecs.front().dim();
    const auto severe_m = normalized_rows(vecs, 0, res.severe.size(), dim);
    const auto mild_m = normalized_rows(vecs, res.severe.size(), vecs.size(), dim);

    res.mild_scores.assign(res.mild.size(), 0.0);
    kernels::active().max_dot(mild_m.data(), res.mild.size(), severe_m.data(), res.severe.size(), dim,
                              res.mild_scores.data());
    for (auto& s : res.mild_scores) s = std::clamp(s, -1.0, 1.0);

    std::vector<std::size_t> order(res.mild.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (res.mild_scores[a] != res.mild_scores[b]) return res.mild_scores[a] > res.mild_scores[b];
      return time_order(res.mild[a], res.mild[b]);
    });
    order.resize(similar_count(res.mild.size(), ratio));
    for (auto idx : order) res.similar.push_back(res.mild[idx]);
  }
  merge_candidates(res);
  return res;
}

SelectionResult select_logs(const LogSession& session, const Embedder* embedder,
                            const SelectionConfig& config) {
  if (session.records.empty()) throw EmptySession("select_logs: session '" + session.session_id + "' is empty");
  auto split = split_by_level(session);

  switch (config.mode) {
    case SelectionMode::Combined: {
      if (!embedder) throw ConfigError("semantic selection requires an embedder");
      return semantic_select(std::move(split.severe), std::move(split.mild), *embedder, config.similar_ratio);
    }
    case SelectionMode::LevelOnly: {
      SelectionResult res;
      res.session_size = session.size();
      res.severe = std::move(split.severe);
      res.mild = std::move(split.mild);
      merge_candidates(res);
      return res;
    }
    case SelectionMode::LevelContext: {
      SelectionResult res;
      res.session_size = session.size();
      const auto& recs = session.records;
      const int best = rank(split.severe.front().level);
      std::vector<bool> keep(recs.size(), false);
      for (std::size_t i = 0; i < recs.size(); ++i) {
        if (rank(recs[i].level) != best) continue;
        const std::size_t lo = i >= config.context_radius ? i - config.context_radius : 0;
        const std::size_t hi = std::min(recs.size() - 1, i + config.context_radius);
        for (std::size_t k = lo; k <= hi; ++k) keep[k] = true;
      }
      for (std::size_t i = 0; i < recs.size(); ++i)
        if (keep[i] && rank(recs[i].level) != best) res.similar.push_back(recs[i]);
      res.severe = std::move(split.severe);
      res.mild = std::move(split.mild);
      merge_candidates(res);
      return res;
    }
    case SelectionMode::None: {
      SelectionResult res;
      res.session_size = session.size();
      res.severe = std::move(split.severe);
      res.mild = std::move(split.mild);
      res.similar = res.mild;
      merge_candidates(res);
      return res;
    }
  }
  throw std::logic_error("unknown selection mode");
}

}  // namespace lofi
