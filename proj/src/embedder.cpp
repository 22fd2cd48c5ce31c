#include "lofi/embedder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "lofi/error.hpp"
#include "lofi/kernels.hpp"

namespace lofi {

EmbeddingVector embed(std::string_view text, const Embedder& embedder) {
  const std::string owned(text);
  auto out = embedder.embed_batch(std::span<const std::string>(&owned, 1));
  return std::move(out.at(0));
}

namespace {

class SerializedEmbedder final : public Embedder {
 public:
  explicit SerializedEmbedder(std::shared_ptr<const Embedder> inner) : inner_(std::move(inner)) {}
  std::size_t dim() const override { return inner_->dim(); }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
    std::lock_guard lock(mu_);
    return inner_->embed_batch(texts);
  }

 private:
  std::shared_ptr<const Embedder> inner_;
  mutable std::mutex mu_;
};

}  // namespace

std::shared_ptr<const Embedder> make_shareable(std::shared_ptr<const Embedder> embedder) {
  if (!embedder || !embedder->serial()) return embedder;
  return std::make_shared<SerializedEmbedder>(std::move(embedder));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::logic_error("cosine: dimension mismatch");
  const double na = kernels::dot(a, a);
  const double nb = kernels::dot(b, b);
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  const double c = kernels::dot(a, b) / std::sqrt(na * nb);
  return std::clamp(c, -1.0, 1.0);
}

HashedTfidfEmbedder::HashedTfidfEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw ConfigError("embedder dimension must be positive");
}

std::uint64_t HashedTfidfEmbedder::fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> HashedTfidfEmbedder::features(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string word(text.substr(i, j - i));
      for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.push_back("w:" + word);
      const std::string padded = " " + word + " ";
      for (std::size_t k = 0; k + 3 <= padded.size(); ++k) out.push_back("c:" + padded.substr(k, 3));
    }
    i = j;
  }
  return out;
}

std::vector<EmbeddingVector> HashedTfidfEmbedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<std::unordered_map<std::size_t, double>> tf(texts.size());
  std::unordered_map<std::size_t, std::size_t> df;
  for (std::size_t d = 0; d < texts.size(); ++d) {
    for (const auto& f : features(texts[d])) tf[d][fnv1a(f) % dim_] += 1.0;
    for (const auto& [bucket, _] : tf[d]) ++df[bucket];
  }
  const double n_docs = static_cast<double>(texts.size());
  std::vector<EmbeddingVector> out(texts.size());
  for (std::size_t d = 0; d < texts.size(); ++d) {
    auto& v = out[d].values;
    v.assign(dim_, 0.0);
    for (const auto& [bucket, count] : tf[d]) {
      const double idf = std::log((1.0 + n_docs) / (1.0 + static_cast<double>(df[bucket]))) + 1.0;
      v[bucket] = count * idf;
    }
    const double norm = std::sqrt(kernels::dot(v, v));
    if (norm > 0.0) kernels::scale(v, 1.0 / norm, v);
  }
  return out;
}

HttpEmbedder::HttpEmbedder(std::string url, std::size_t expected_dim, HttpClientOptions options)
    : client_(std::move(url), options), dim_(expected_dim) {}

std::size_t HttpEmbedder::dim() const { return dim_.load(); }

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(std::span<const std::string> texts) const {
  nlohmann::json req;
  req["texts"] = std::vector<std::string>(texts.begin(), texts.end());
  const auto res = client_.post(req);
  std::vector<EmbeddingVector> out;
  try {
    const auto dim = res.at("dim").get<std::size_t>();
    const auto& vectors = res.at("vectors");
    if (vectors.size() != texts.size())
      throw BackendUnavailable(client_.url() + ": expected " + std::to_string(texts.size()) +
                                   " vectors, got " + std::to_string(vectors.size()),
                               1, 200, 0);
    std::size_t known = 0;
    if (!dim_.compare_exchange_strong(known, dim) && known != dim)
      throw BackendUnavailable(client_.url() + ": embedder dimension changed", 1, 200, 0);
    for (const auto& v : vectors) {
      EmbeddingVector e{v.get<std::vector<double>>()};
      if (e.dim() != dim) throw BackendUnavailable(client_.url() + ": vector length != dim", 1, 200, 0);
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendUnavailable(client_.url() + ": malformed embedder response: " + e.what(), 1, 200, 0);
  }
  return out;
}

}  // namespace lofi
