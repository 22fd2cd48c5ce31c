#include "lofi/drain.hpp"

#include <algorithm>
#include <cctype>

namespace lofi {

namespace {

bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string Template::text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

struct DrainState::Node {
  std::map<std::string, std::unique_ptr<Node>, std::less<>> children;
  std::vector<int> template_ids;
};

DrainState::DrainState(DrainParams params) : params_(params), root_(std::make_unique<Node>()) {
  if (params_.depth < 3) params_.depth = 3;
  if (params_.max_children < 2) params_.max_children = 2;
}

DrainState::DrainState(DrainState&&) noexcept = default;
DrainState& DrainState::operator=(DrainState&&) noexcept = default;
DrainState::~DrainState() = default;

DrainState DrainState::from_templates(const std::vector<std::string>& templates, DrainParams params) {
  DrainState state(params);
  for (const auto& t : templates) state.add_template(split_whitespace(t));
  return state;
}

DrainState::Node* DrainState::leaf_for(const std::vector<std::string>& tokens, bool create) {
  const std::string length_key = std::to_string(tokens.size());
  auto& by_length = root_->children[length_key];
  if (!by_length) by_length = std::make_unique<Node>();
  Node* node = by_length.get();
  const std::size_t prefix = std::min(tokens.size(), params_.depth - 2);
  const std::string wildcard(kWildcard);
  for (std::size_t d = 0; d < prefix; ++d) {
    const std::string& tok = tokens[d];
    if (auto it = node->children.find(tok); it != node->children.end()) {
      node = it->second.get();
      continue;
    }
    if (!create) return nullptr;
    auto& kids = node->children;
    const bool has_wild = kids.count(wildcard) > 0;
    std::string key;
    if (has_digit(tok) || tok == kWildcard) {
      key = wildcard;
    } else if (has_wild) {
      key = kids.size() < params_.max_children ? tok : wildcard;
    } else {
      if (kids.size() + 1 < params_.max_children) key = tok;
      else key = wildcard;
    }
    auto& child = kids[key];
    if (!child) child = std::make_unique<Node>();
    node = child.get();
  }
  return node;
}

const DrainState::Node* DrainState::find_leaf(const std::vector<std::string>& tokens) const {
  auto it = root_->children.find(std::to_string(tokens.size()));
  if (it == root_->children.end()) return nullptr;
  const Node* node = it->second.get();
  const std::size_t prefix = std::min(tokens.size(), params_.depth - 2);
  for (std::size_t d = 0; d < prefix; ++d) {
    auto next = node->children.find(tokens[d]);
    if (next == node->children.end()) next = node->children.find(kWildcard);
    if (next == node->children.end()) return nullptr;
    node = next->second.get();
  }
  return node;
}

std::optional<int> DrainState::best_match(const Node& leaf, const std::vector<std::string>& tokens) const {
  std::optional<int> best;
  double best_sim = -1.0;
  std::size_t best_params = 0;
  for (int id : leaf.template_ids) {
    const auto& tpl = templates_[id].tokens;
    if (tpl.size() != tokens.size()) continue;
    std::size_t same = 0, params = 0;
    for (std::size_t k = 0; k < tpl.size(); ++k) {
      if (tpl[k] == kWildcard) {
        ++params;
        continue;
      }
      if (tpl[k] == tokens[k]) ++same;
    }
    const double sim = tpl.empty() ? 1.0 : static_cast<double>(same) / static_cast<double>(tpl.size());
    if (sim > best_sim || (sim == best_sim && params > best_params)) {
      best_sim = sim;
      best_params = params;
      best = id;
    }
  }
  if (best && best_sim >= params_.sim_threshold) return best;
  return std::nullopt;
}

int DrainState::add_template(std::vector<std::string> tokens) {
  Node* leaf = leaf_for(tokens, true);
  const int id = static_cast<int>(templates_.size());
  templates_.push_back({id, std::move(tokens)});
  leaf->template_ids.push_back(id);
  return id;
}

const Template& DrainState::learn(std::string_view content) {
  auto tokens = split_whitespace(content);
  if (const Node* leaf = find_leaf(tokens)) {
    if (auto id = best_match(*leaf, tokens)) {
      auto& tpl = templates_[*id].tokens;
      for (std::size_t k = 0; k < tpl.size(); ++k)
        if (tpl[k] != tokens[k]) tpl[k] = std::string(kWildcard);
      return templates_[*id];
    }
  }
  return templates_[add_template(std::move(tokens))];
}

std::optional<int> DrainState::match(std::string_view content) const {
  const auto tokens = split_whitespace(content);
  const Node* leaf = find_leaf(tokens);
  if (!leaf) return std::nullopt;
  return best_match(*leaf, tokens);
}

std::vector<std::string> DrainState::vocabulary() const {
  std::vector<std::string> out;
  out.reserve(templates_.size());
  for (const auto& t : templates_) out.push_back(t.text());
  return out;
}

}  // namespace lofi
