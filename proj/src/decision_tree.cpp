#include "lofi/decision_tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "lofi/error.hpp"

namespace lofi {

namespace {

double gini(std::size_t pos, std::size_t n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(n);
  return 2.0 * p * (1.0 - p);
}

struct Sample {
  const FeatureVector* x;
  bool positive;
};

class Builder {
 public:
  Builder(std::vector<Sample> samples, std::size_t n_features, const DtParams& params)
      : samples_(std::move(samples)), n_features_(n_features), params_(params) {}

  std::vector<DecisionTreeModel::Node> build() {
    std::vector<std::size_t> idx(samples_.size());
    std::iota(idx.begin(), idx.end(), 0);
    grow(idx, 0);
    return std::move(nodes_);
  }

 private:
  int grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::size_t pos = 0;
    for (auto i : idx) pos += samples_[i].positive ? 1 : 0;
    nodes_[id].samples = idx.size();
    nodes_[id].positive = static_cast<double>(pos) / static_cast<double>(idx.size());

    const bool pure = pos == 0 || pos == idx.size();
    if (pure || depth >= params_.max_depth || idx.size() < params_.min_samples_split) return id;

    const double parent = gini(pos, idx.size());
    double best_impurity = parent;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, bool>> column(idx.size());
    for (std::size_t f = 0; f < n_features_; ++f) {
      for (std::size_t k = 0; k < idx.size(); ++k)
        column[k] = {(*samples_[idx[k]].x)[f], samples_[idx[k]].positive};
      std::sort(column.begin(), column.end());
      std::size_t left_n = 0, left_pos = 0;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        ++left_n;
        left_pos += column[k].second ? 1 : 0;
        if (column[k].first == column[k + 1].first) continue;
        const std::size_t right_n = column.size() - left_n;
        const std::size_t right_pos = pos - left_pos;
        const double impurity =
            (static_cast<double>(left_n) * gini(left_pos, left_n) +
             static_cast<double>(right_n) * gini(right_pos, right_n)) /
            static_cast<double>(column.size());
        if (impurity < best_impurity - 1e-12) {
          best_impurity = impurity;
          best_feature = static_cast<int>(f);
          best_threshold = column[k].first + (column[k + 1].first - column[k].first) / 2.0;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) ((*samples_[i].x)[best_feature] <= best_threshold ? left : right).push_back(i);
    nodes_[id].feature = best_feature;
    nodes_[id].threshold = best_threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<Sample> samples_;
  std::size_t n_features_;
  DtParams params_;
  std::vector<DecisionTreeModel::Node> nodes_;
};

}  // namespace

std::size_t DecisionTreeModel::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[n].is_leaf()) {
      stack.emplace_back(nodes[n].left, d + 1);
      stack.emplace_back(nodes[n].right, d + 1);
    }
  }
  return deepest;
}

DecisionTreeModel dt_train(const std::vector<FeatureVector>& positive, const std::vector<FeatureVector>& negative,
                           const DtParams& params) {
  if (positive.empty() || negative.empty())
    throw std::invalid_argument("dt_train: both classes need at least one example");
  const std::size_t width = positive.front().size();
  std::vector<Sample> samples;
  for (const auto& x : positive) samples.push_back({&x, true});
  for (const auto& x : negative) samples.push_back({&x, false});
  for (const auto& s : samples)
    if (s.x->size() != width) throw std::invalid_argument("dt_train: feature vectors differ in width");

  DecisionTreeModel model;
  model.params = params;
  model.n_features = width;
  model.nodes = Builder(std::move(samples), width, params).build();
  return model;
}

DtPrediction dt_predict(const DecisionTreeModel& model, std::span<const double> x) {
  if (model.nodes.empty()) throw std::invalid_argument("dt_predict: empty model");
  if (x.size() != model.n_features)
    throw std::invalid_argument("dt_predict: expected " + std::to_string(model.n_features) + " features, got " +
                                std::to_string(x.size()));
  int n = 0;
  while (!model.nodes[n].is_leaf()) {
    const auto& node = model.nodes[n];
    n = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  const double score = model.nodes[n].positive;
  return {score >= 0.5, score};
}

nlohmann::json to_json(const DecisionTreeModel& model) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : model.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"positive", n.positive},
                     {"samples", n.samples}});
  }
  return {{"params",
           {{"max_depth", model.params.max_depth},
            {"min_samples_split", model.params.min_samples_split},
            {"seed", model.params.seed}}},
          {"n_features", model.n_features},
          {"nodes", std::move(nodes)}};
}

DecisionTreeModel tree_from_json(const nlohmann::json& j) {
  DecisionTreeModel m;
  try {
    const auto& p = j.at("params");
    m.params.max_depth = p.at("max_depth").get<std::size_t>();
    m.params.min_samples_split = p.at("min_samples_split").get<std::size_t>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& n : j.at("nodes")) {
      DecisionTreeModel::Node node;
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
      node.positive = n.at("positive").get<double>();
      node.samples = n.at("samples").get<std::size_t>();
      m.nodes.push_back(node);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed decision tree: ") + e.what());
  }
  const int count = static_cast<int>(m.nodes.size());
  if (count == 0) throw InputError("decision tree has no nodes");
  for (int i = 0; i < count; ++i) {
    const auto& n = m.nodes[i];
    if (n.is_leaf()) continue;
    // Children always follow their parent, which also rules out cycles.
    if (n.feature >= static_cast<int>(m.n_features) || n.left <= i || n.right <= i || n.left >= count ||
        n.right >= count)
      throw InputError("decision tree node references an invalid feature or child");
  }
  return m;
}

}  // namespace lofi
