#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lofi {

inline constexpr std::string_view kWildcard = "<*>";

struct DrainParams {
  std::size_t depth = 4;  // root + length layer + (depth - 2) leading-token layers
  double sim_threshold = 0.4;
  std::size_t max_children = 100;
};

struct Template {
  int id = 0;
  std::vector<std::string> tokens;  // kWildcard marks parameter slots

  std::size_t length() const noexcept { return tokens.size(); }
  std::string text() const;
};

// Fixed-depth prefix-tree template miner.
//
// Logs are routed by token count, then by their leading tokens (tokens containing digits
// share one wildcard branch). Within a leaf the most similar template of equal length is
// taken when similarity >= sim_threshold, otherwise a new template is created.
class DrainState {
 public:
  explicit DrainState(DrainParams params = {});
  DrainState(DrainState&&) noexcept;
  DrainState& operator=(DrainState&&) noexcept;
  ~DrainState();

  // Rebuilds a frozen state from template strings, ids assigned in list order.
  static DrainState from_templates(const std::vector<std::string>& templates, DrainParams params = {});

  // Learning mode: matched templates are generalised in place.
  const Template& learn(std::string_view content);

  // Frozen mode: no state change. Returns the matching template id.
  std::optional<int> match(std::string_view content) const;

  const std::vector<Template>& templates() const noexcept { return templates_; }
  std::vector<std::string> vocabulary() const;
  const DrainParams& params() const noexcept { return params_; }

 private:
  struct Node;
  Node* leaf_for(const std::vector<std::string>& tokens, bool create);
  const Node* find_leaf(const std::vector<std::string>& tokens) const;
  std::optional<int> best_match(const Node& leaf, const std::vector<std::string>& tokens) const;
  int add_template(std::vector<std::string> tokens);

  DrainParams params_;
  std::vector<Template> templates_;
  std::unique_ptr<Node> root_;
};

std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace lofi
