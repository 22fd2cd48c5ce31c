#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lofi/embedder.hpp"
#include "lofi/fault_info.hpp"
#include "lofi/http_client.hpp"
#include "lofi/record.hpp"
#include "lofi/selection.hpp"

namespace lofi {

enum class PromptKind { Fid, Fip };

inline constexpr std::string_view kFidQuestion =
    "What are the most significant and representative description strings to describe the fault from the logs?";
inline constexpr std::string_view kFipQuestion =
    "What are the most crucial and representative parameters to locate the faulty instances from the logs?";

constexpr std::string_view question_for(PromptKind kind) noexcept {
  return kind == PromptKind::Fid ? kFidQuestion : kFipQuestion;
}

inline constexpr std::size_t kDefaultMaxTokens = 512;
inline constexpr std::size_t kDefaultTopK = 3;
inline constexpr std::size_t kDefaultMaxSpanLen = 64;
inline constexpr std::size_t kDefaultBaselineWords = 6;

struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Token> tokenize(std::string_view text) const = 0;
};

class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::vector<Token> tokenize(std::string_view text) const override;
};

enum class SegmentKind { Cls, Question, Sep, Log };

struct Segment {
  SegmentKind kind = SegmentKind::Cls;
  int log = -1;  // index of the packed log for Log tokens

  bool operator==(const Segment&) const = default;
};

// Wire spelling: "CLS", "QUESTION", "SEP", "LOG(<i>)".
std::string to_string(const Segment& s);
std::optional<Segment> parse_segment(std::string_view s);

// [CLS] question [SEP] log_0 [SEP] ... log_n [SEP]
//
// source_text is the question followed by every log, each preceded by '\n'. char_spans of
// special tokens are empty ranges at their position in that text.
struct PackedInput {
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, std::size_t>> char_spans;
  std::vector<Segment> segments;
  std::string source_text;
  std::vector<std::size_t> packed_logs;   // candidate index of each LOG(i) segment
  std::vector<std::size_t> dropped_logs;  // candidate indices left out for budget
  bool truncated = false;                 // a log lost tail tokens

  std::size_t size() const noexcept { return tokens.size(); }
};

// Layout and offset invariants; returns the first violation found.
std::optional<std::string> check_packed(const PackedInput& packed, std::size_t max_tokens);

// Source text layout shared with remote backends.
std::string packed_source_text(std::string_view question, std::span<const std::string> logs);

// `drop_order` lists candidate indices in the order they may be removed when over budget.
// The last remaining log is never dropped; it is truncated at the tail instead.
PackedInput pack_input(std::string_view question, std::span<const LogRecord> candidates,
                       const Tokenizer& tokenizer, std::size_t max_tokens = kDefaultMaxTokens,
                       std::span<const std::size_t> drop_order = {});

// Lowest-ranked similar logs first, then severe logs from the tail; the first severe log stays.
std::vector<std::size_t> drop_order_for(const SelectionResult& selection);

struct SpanLogits {
  std::vector<double> start;
  std::vector<double> end;
};

// Greedy non-overlapping top-k over P_start(i) * P_end(j), j >= i, inside one log segment,
// at most max_span_len tokens long. Softmax runs over LOG tokens only. Sorted by score desc;
// ties prefer the smaller start, then the smaller end.
std::vector<SpanCandidate> select_spans(const SpanLogits& logits, const PackedInput& packed,
                                        std::size_t k = kDefaultTopK,
                                        std::size_t max_span_len = kDefaultMaxSpanLen);

// Whitespace-normalised text covered by tokens i..j.
std::string span_text(const PackedInput& packed, std::size_t i, std::size_t j);

// Spans in document order joined by single spaces.
std::string render_answer(std::span<const SpanCandidate> spans, const PackedInput& packed);

// Top-k TF-IDF words of the candidate logs (each log a document), in document order.
FaultInfo tfidf_baseline(std::span<const LogRecord> candidates, std::size_t k = kDefaultBaselineWords);

struct SpanRequest {
  std::string question;
  std::vector<std::string> logs;
  std::size_t max_tokens = kDefaultMaxTokens;
};

struct SpanResponse {
  PackedInput packed;
  SpanLogits logits;
};

// Model that tokenizes, packs and scores a request. The primary does all span math.
class SpanBackend {
 public:
  virtual ~SpanBackend() = default;
  virtual SpanResponse query(const SpanRequest& request) const = 0;
  virtual int max_in_flight() const { return 32; }
};

nlohmann::json to_json(const SpanRequest& request);
// Throws BackendUnavailable when the body violates the protocol.
SpanResponse parse_span_response(const nlohmann::json& body, const SpanRequest& request);

class HttpSpanBackend final : public SpanBackend {
 public:
  explicit HttpSpanBackend(std::string url, HttpClientOptions options = {});
  SpanResponse query(const SpanRequest& request) const override;
  int max_in_flight() const override { return max_in_flight_; }

 private:
  JsonPostClient client_;
  int max_in_flight_;
};

struct ExtractConfig {
  SelectionConfig selection;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::size_t top_k = kDefaultTopK;
  std::size_t max_span_len = kDefaultMaxSpanLen;
  std::size_t baseline_words = kDefaultBaselineWords;
  double fip_min_score = 0.0;
  bool allow_fallback = true;
};

struct ExtractionResult {
  FaultInfo info;
  SelectionResult selection;
  bool degraded = false;
  std::string error;  // why the result is degraded
};

// Selection, then one backend query per prompt. A null backend runs the TF-IDF baseline.
// Backend failures fall back to the baseline (degraded) unless allow_fallback is off.
ExtractionResult extract(const LogSession& session, const Embedder* embedder,
                         const SpanBackend* backend, const ExtractConfig& config = {});

}  // namespace lofi
