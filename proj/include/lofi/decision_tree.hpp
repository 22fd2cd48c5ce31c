#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

namespace lofi {

struct DtParams {
  std::size_t max_depth = 10;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 0;  // recorded for provenance; training is fully deterministic
};

// Binary CART classifier over dense feature vectors, Gini impurity.
struct DecisionTreeModel {
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double positive = 0.0;  // positive-class fraction of the training samples reaching this node
    std::size_t samples = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  DtParams params;
  std::size_t n_features = 0;
  std::vector<Node> nodes;  // nodes[0] is the root

  std::size_t depth() const;
};

using FeatureVector = std::vector<double>;

// Throws std::invalid_argument when a class is empty or vectors differ in width.
// Splits are chosen by lowest weighted Gini; ties go to the lower feature index, then the
// lower threshold. Thresholds sit midway between adjacent distinct values.
DecisionTreeModel dt_train(const std::vector<FeatureVector>& positive,
                           const std::vector<FeatureVector>& negative, const DtParams& params = {});

struct DtPrediction {
  bool anomalous = false;
  double score = 0.0;
};

DtPrediction dt_predict(const DecisionTreeModel& model, std::span<const double> x);

nlohmann::json to_json(const DecisionTreeModel& model);
DecisionTreeModel tree_from_json(const nlohmann::json& j);

}  // namespace lofi
