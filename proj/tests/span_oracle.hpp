#pragma once

// Exhaustive span enumeration used to check select_spans, plus a random packed-input generator.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lofi/extraction.hpp"

namespace oracle {

struct Span {
  std::size_t i, j;
  double score;
};

inline std::vector<double> softmax_over(const std::vector<double>& logits, const std::vector<bool>& eligible) {
  double hi = -INFINITY;
  for (std::size_t t = 0; t < logits.size(); ++t)
    if (eligible[t]) hi = std::max(hi, logits[t]);
  std::vector<double> p(logits.size(), 0.0);
  double z = 0.0;
  for (std::size_t t = 0; t < logits.size(); ++t)
    if (eligible[t]) z += std::exp(logits[t] - hi);
  for (std::size_t t = 0; t < logits.size(); ++t)
    if (eligible[t]) p[t] = std::exp(logits[t] - hi) / z;
  return p;
}

// Every (i, j) pair with both ends in one log segment, scored and ranked; then greedy top-k.
inline std::vector<Span> brute_force(const lofi::SpanLogits& logits, const lofi::PackedInput& packed, std::size_t k,
                                     std::size_t max_span_len) {
  const std::size_t n = packed.size();
  std::vector<bool> eligible(n);
  for (std::size_t t = 0; t < n; ++t) eligible[t] = packed.segments[t].kind == lofi::SegmentKind::Log;
  const auto ps = softmax_over(logits.start, eligible);
  const auto pe = softmax_over(logits.end, eligible);

  std::vector<Span> all;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      bool ok = j - i + 1 <= max_span_len;
      for (std::size_t t = i; ok && t <= j; ++t)
        ok = eligible[t] && packed.segments[t].log == packed.segments[i].log;
      if (ok) all.push_back({i, j, ps[i] * pe[j]});
    }
  std::stable_sort(all.begin(), all.end(), [](const Span& a, const Span& b) { return a.score > b.score; });

  std::vector<Span> picked;
  for (const auto& s : all) {
    if (picked.size() == k) break;
    bool clash = false;
    for (const auto& p : picked) clash = clash || !(s.j < p.i || p.j < s.i);
    if (!clash) picked.push_back(s);
  }
  return picked;
}

// Random logs packed with the whitespace tokenizer, at most `max_eligible` log tokens in total.
inline lofi::PackedInput random_packed(std::mt19937_64& rng, std::size_t max_eligible) {
  static const char* words[] = {"error", "bean", "ServicePath5", "at", "host", "10.0.0.1", "failed", "x", "taskId:f2"};
  std::uniform_int_distribution<std::size_t> n_logs(1, 5);
  std::uniform_int_distribution<std::size_t> budget(1, max_eligible);
  std::uniform_int_distribution<std::size_t> word(0, std::size(words) - 1);
  const std::size_t total = budget(rng);
  const std::size_t logs = std::min(n_logs(rng), total);
  std::vector<std::size_t> lengths(logs, 1);
  for (std::size_t extra = total - logs; extra > 0; --extra) lengths[rng() % logs] += 1;

  std::vector<lofi::LogRecord> recs;
  for (std::size_t l = 0; l < logs; ++l) {
    lofi::LogRecord r;
    for (std::size_t w = 0; w < lengths[l]; ++w) r.content += (w ? " " : "") + std::string(words[word(rng)]);
    recs.push_back(r);
  }
  return lofi::pack_input("what failed?", recs, lofi::WhitespaceTokenizer{}, 4096);
}

inline lofi::SpanLogits random_logits(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 2.0);
  lofi::SpanLogits l;
  for (std::size_t t = 0; t < n; ++t) {
    l.start.push_back(d(rng));
    l.end.push_back(d(rng));
  }
  return l;
}

}  // namespace oracle
