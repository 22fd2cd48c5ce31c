#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "lofi/extraction.hpp"

namespace lofi {

FaultInfo tfidf_baseline(std::span<const LogRecord> candidates, std::size_t k) {
  if (candidates.empty()) throw std::invalid_argument("tfidf_baseline: no candidate logs");
  const WhitespaceTokenizer tokenizer;

  struct WordStat {
    std::size_t first_seen = 0;  // position in the concatenated documents
    std::size_t df = 0;
    std::size_t last_doc = static_cast<std::size_t>(-1);
  };
  std::unordered_map<std::string, WordStat> stats;
  std::vector<std::string> order;  // distinct words by first occurrence

  std::size_t position = 0;
  std::vector<std::unordered_map<std::string, std::size_t>> counts(candidates.size());
  std::vector<std::size_t> lengths(candidates.size());
  for (std::size_t d = 0; d < candidates.size(); ++d) {
    const auto tokens = tokenizer.tokenize(candidates[d].content);
    lengths[d] = tokens.size();
    for (const auto& t : tokens) {
      auto [it, inserted] = stats.try_emplace(t.text);
      if (inserted) {
        it->second.first_seen = position;
        order.push_back(t.text);
      }
      if (it->second.last_doc != d) {
        it->second.last_doc = d;
        ++it->second.df;
      }
      ++counts[d][t.text];
      ++position;
    }
  }

  const double n_docs = static_cast<double>(candidates.size());
  std::unordered_map<std::string, double> weight;
  for (std::size_t d = 0; d < candidates.size(); ++d) {
    for (const auto& [word, c] : counts[d]) {
      const double tf = static_cast<double>(c) / static_cast<double>(lengths[d]);
      const double idf = std::log(n_docs / static_cast<double>(stats[word].df));
      auto& w = weight[word];
      w = std::max(w, tf * idf);
    }
  }

  std::vector<std::string> ranked = order;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](const std::string& a, const std::string& b) { return weight[a] > weight[b]; });
  if (ranked.size() > k) ranked.resize(k);
  std::sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
    return stats[a].first_seen < stats[b].first_seen;
  });

  std::string joined;
  for (const auto& w : ranked) {
    if (!joined.empty()) joined += ' ';
    joined += w;
  }
  FaultInfo info;
  info.fid = joined;
  if (!joined.empty()) info.fip = joined;
  return info;
}

}  // namespace lofi
