#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lofi/http_client.hpp"

namespace lofi {

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const noexcept { return values.size(); }
};

// Text encoder used by semantic selection.
//
// embed_batch() receives every text of one session at once so that corpus-level
// statistics (the built-in embedder's IDF) are scoped to that session.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;
  // True when concurrent embed_batch() calls are not allowed.
  virtual bool serial() const { return false; }
};

EmbeddingVector embed(std::string_view text, const Embedder& embedder);

// Wraps a serial embedder so concurrent callers take turns; returns others unchanged.
std::shared_ptr<const Embedder> make_shareable(std::shared_ptr<const Embedder> embedder);

// Cosine similarity clamped to [-1, 1]; 0 when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

// Hashed TF-IDF over lowercase word unigrams and character trigrams, L2-normalised.
// Features are bucketed with 64-bit FNV-1a; IDF is smoothed: ln((1+N)/(1+df)) + 1.
class HashedTfidfEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDefaultDim = 1024;

  explicit HashedTfidfEmbedder(std::size_t dim = kDefaultDim);

  std::size_t dim() const override { return dim_; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

  // Feature strings of one text, in order of appearance ("w:<word>", "c:<trigram>").
  static std::vector<std::string> features(std::string_view text);
  static std::uint64_t fnv1a(std::string_view bytes) noexcept;

 private:
  std::size_t dim_;
};

// Remote encoder speaking {"texts": [...]} -> {"vectors": [[...]], "dim": n}.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::string url, std::size_t expected_dim = 0, HttpClientOptions options = {});

  std::size_t dim() const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  JsonPostClient client_;
  mutable std::atomic<std::size_t> dim_;
};

}  // namespace lofi
