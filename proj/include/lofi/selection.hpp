#pragma once

#include <cstddef>
#include <vector>

#include "lofi/embedder.hpp"
#include "lofi/record.hpp"

namespace lofi {

enum class SelectionMode {
  Combined,      // level selection + semantic selection
  LevelOnly,     // severe logs only
  LevelContext,  // severe logs plus their immediate neighbours
  None,          // every log is a candidate
};

struct SelectionConfig {
  SelectionMode mode = SelectionMode::Combined;
  double similar_ratio = 0.10;
  std::size_t context_radius = 1;
};

struct SelectionResult {
  std::vector<LogRecord> severe;  // session order
  std::vector<LogRecord> mild;    // session order
  std::vector<double> mild_scores;  // aligned with mild; empty when no semantic scoring ran
  std::vector<LogRecord> similar;   // ranked, best first
  std::vector<LogRecord> candidates;  // severe + similar in (timestamp, line_no) order
  // Per candidate: -1 for a severe log, otherwise the log's rank within `similar`.
  std::vector<int> candidate_rank;
  std::size_t session_size = 0;

  double compression_ratio() const noexcept {
    return session_size ? static_cast<double>(candidates.size()) / static_cast<double>(session_size) : 0.0;
  }
};

struct LevelSplit {
  std::vector<LogRecord> severe;
  std::vector<LogRecord> mild;
};

// Severe = every record at the most severe level present in the session.
LevelSplit split_by_level(const LogSession& session);

// ceil(ratio * n_mild) with a minimum of 1 when n_mild > 0.
std::size_t similar_count(std::size_t n_mild, double ratio = 0.10) noexcept;

// Scores each mild record by its best cosine similarity to any severe record and keeps the top
// similar_count() of them. Ties go to the earlier timestamp, then the smaller line number.
SelectionResult semantic_select(std::vector<LogRecord> severe, std::vector<LogRecord> mild,
                                const Embedder& embedder, double ratio = 0.10);

// `embedder` may be null unless the mode is Combined.
SelectionResult select_logs(const LogSession& session, const Embedder* embedder,
                            const SelectionConfig& config = {});

}  // namespace lofi
