#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lofi/fault_info.hpp"
#include "lofi/selection.hpp"

namespace lofi {

struct EvalScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Lowercase, split on whitespace, strip leading/trailing punctuation; empty tokens vanish.
std::vector<std::string> normalize_tokens(std::string_view text);

// Bag-of-words overlap (multiset intersection). Gold must be non-empty after normalisation.
EvalScores token_f1(std::string_view prediction, std::string_view gold);

inline constexpr std::string_view kNormalizationPolicy =
    "lowercase; whitespace split; strip surrounding punctuation; multiset overlap";

enum class MissingFipPolicy {
  Skip,        // examples without a gold FIP do not count towards FIP scores
  ScoreEmpty,  // they count; an absent prediction scores 1, any prediction scores 0
};

struct ExampleReport {
  std::string case_id;
  EvalScores fid;
  std::optional<EvalScores> fip;  // nullopt when skipped
  double compression = 0.0;       // |candidates| / |session|
  bool selection_correct = false;
};

struct DatasetReport {
  std::vector<ExampleReport> examples;
  EvalScores fid_macro;
  EvalScores fip_macro;
  std::size_t fip_evaluated = 0;
  std::size_t fip_skipped = 0;
  double compression_ratio = 0.0;
  double selection_accuracy = 0.0;
  std::string normalization{kNormalizationPolicy};
};

// Throws InputError when the three lists differ in length.
DatasetReport evaluate_dataset(const std::vector<FaultInfo>& predictions, const std::vector<FaultInfo>& golds,
                               const std::vector<SelectionResult>& selections,
                               MissingFipPolicy policy = MissingFipPolicy::Skip,
                               const std::vector<std::string>& case_ids = {});

// True when some candidate contains the gold FID and (if present) some candidate contains the gold FIP.
bool selection_carries(const SelectionResult& selection, const FaultInfo& gold);

nlohmann::json to_json(const DatasetReport& report);
std::string to_table(const DatasetReport& report);
std::string to_csv(const DatasetReport& report);

}  // namespace lofi
