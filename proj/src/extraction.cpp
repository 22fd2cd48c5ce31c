#include "lofi/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <stdexcept>

#include "lofi/error.hpp"
#include "lofi/kernels.hpp"

namespace lofi {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string normalize_ws(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

struct ScoredSpan {
  double score;
  std::size_t i;
  std::size_t j;
};

// Softmax over the given positions of `logits`; other entries of the result are 0.
std::vector<double> masked_softmax(const std::vector<double>& logits,
                                   const std::vector<std::size_t>& positions) {
  std::vector<double> picked(positions.size());
  for (std::size_t p = 0; p < positions.size(); ++p) picked[p] = logits[positions[p]];
  const double m = kernels::max(picked);
  for (auto& v : picked) v = std::exp(v - m);
  const double z = kernels::sum(picked);
  std::vector<double> out(logits.size(), 0.0);
  for (std::size_t p = 0; p < positions.size(); ++p) out[positions[p]] = picked[p] / z;
  return out;
}

}  // namespace

std::string_view to_string(FidSubtype s) noexcept {
  switch (s) {
    case FidSubtype::ErrorMessage: return "error_message";
    case FidSubtype::MissingComponent: return "missing_component";
    case FidSubtype::AbnormalBehavior: return "abnormal_behavior";
    case FidSubtype::WrongStatus: return "wrong_status";
  }
  return "error_message";
}

std::string_view to_string(FipSubtype s) noexcept {
  switch (s) {
    case FipSubtype::Address: return "address";
    case FipSubtype::ComponentId: return "component_id";
    case FipSubtype::ParameterName: return "parameter_name";
  }
  return "address";
}

FidSubtype parse_fid_subtype(std::string_view s) {
  for (auto v : {FidSubtype::ErrorMessage, FidSubtype::MissingComponent, FidSubtype::AbnormalBehavior,
                 FidSubtype::WrongStatus})
    if (to_string(v) == s) return v;
  throw InputError("unknown FID subtype '" + std::string(s) + "'");
}

FipSubtype parse_fip_subtype(std::string_view s) {
  for (auto v : {FipSubtype::Address, FipSubtype::ComponentId, FipSubtype::ParameterName})
    if (to_string(v) == s) return v;
  throw InputError("unknown FIP subtype '" + std::string(s) + "'");
}

std::vector<Token> WhitespaceTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.push_back({std::string(text.substr(i, j - i)), i, j});
    i = j;
  }
  return out;
}

std::string to_string(const Segment& s) {
  switch (s.kind) {
    case SegmentKind::Cls: return "CLS";
    case SegmentKind::Question: return "QUESTION";
    case SegmentKind::Sep: return "SEP";
    case SegmentKind::Log: return "LOG(" + std::to_string(s.log) + ")";
  }
  return "SEP";
}

std::optional<Segment> parse_segment(std::string_view s) {
  if (s == "CLS") return Segment{SegmentKind::Cls, -1};
  if (s == "QUESTION") return Segment{SegmentKind::Question, -1};
  if (s == "SEP") return Segment{SegmentKind::Sep, -1};
  if (s.size() > 5 && s.substr(0, 4) == "LOG(" && s.back() == ')') {
    const auto digits = s.substr(4, s.size() - 5);
    if (digits.empty() || digits.size() > 9) return std::nullopt;
    int v = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + (c - '0');
    }
    return Segment{SegmentKind::Log, v};
  }
  return std::nullopt;
}

std::string packed_source_text(std::string_view question, std::span<const std::string> logs) {
  std::string out(question);
  for (const auto& l : logs) {
    out += '\n';
    out += l;
  }
  return out;
}

std::optional<std::string> check_packed(const PackedInput& p, std::size_t max_tokens) {
  const std::size_t n = p.tokens.size();
  if (p.char_spans.size() != n || p.segments.size() != n) return "token, span and segment counts differ";
  if (n > max_tokens) return "packed length " + std::to_string(n) + " exceeds " + std::to_string(max_tokens);
  if (n < 4) return "packed input too short";
  if (p.segments[0].kind != SegmentKind::Cls) return "first token is not CLS";
  std::size_t t = 1;
  while (t < n && p.segments[t].kind == SegmentKind::Question) ++t;
  if (t == 1) return "no question tokens";
  if (t >= n || p.segments[t].kind != SegmentKind::Sep) return "question not followed by SEP";
  ++t;
  int expected_log = -1;
  while (t < n) {
    if (p.segments[t].kind != SegmentKind::Log) return "expected a LOG token at " + std::to_string(t);
    const int log = p.segments[t].log;
    if (log <= expected_log) return "log segments out of order at " + std::to_string(t);
    expected_log = log;
    while (t < n && p.segments[t].kind == SegmentKind::Log && p.segments[t].log == log) ++t;
    if (t >= n || p.segments[t].kind != SegmentKind::Sep) return "log segment not closed by SEP";
    ++t;
  }
  if (expected_log < 0) return "no log segments";
  std::size_t last_end = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto [b, e] = p.char_spans[k];
    if (b > e || e > p.source_text.size()) return "char span out of range at " + std::to_string(k);
    const auto kind = p.segments[k].kind;
    if (kind == SegmentKind::Cls || kind == SegmentKind::Sep) continue;
    if (b < last_end) return "char spans overlap or go backwards at " + std::to_string(k);
    last_end = e;
  }
  return std::nullopt;
}

std::vector<std::size_t> drop_order_for(const SelectionResult& sel) {
  std::vector<std::pair<int, std::size_t>> similar;  // (rank, candidate index)
  std::vector<std::size_t> severe;
  for (std::size_t c = 0; c < sel.candidate_rank.size(); ++c) {
    if (sel.candidate_rank[c] < 0) severe.push_back(c);
    else similar.emplace_back(sel.candidate_rank[c], c);
  }
  std::sort(similar.begin(), similar.end(), std::greater<>());
  std::vector<std::size_t> order;
  for (const auto& [_, c] : similar) order.push_back(c);
  for (std::size_t k = severe.size(); k > 1; --k) order.push_back(severe[k - 1]);
  return order;
}

PackedInput pack_input(std::string_view question, std::span<const LogRecord> candidates,
                       const Tokenizer& tokenizer, std::size_t max_tokens,
                       std::span<const std::size_t> drop_order) {
  if (candidates.empty()) throw std::invalid_argument("pack_input: no candidate logs");
  const auto q_tokens = tokenizer.tokenize(question);
  if (q_tokens.empty()) throw std::invalid_argument("pack_input: empty question");
  if (max_tokens < q_tokens.size() + 4)
    throw ConfigError("max_tokens " + std::to_string(max_tokens) + " cannot hold the question");

  std::vector<std::vector<Token>> log_tokens;
  log_tokens.reserve(candidates.size());
  for (const auto& c : candidates) log_tokens.push_back(tokenizer.tokenize(c.content));

  std::vector<bool> keep(candidates.size(), true);
  std::size_t kept = candidates.size();
  std::size_t total = q_tokens.size() + 2;
  for (const auto& t : log_tokens) total += t.size() + 1;

  PackedInput out;
  // Fallback order when the caller gave none: drop from the tail, never the first log.
  std::vector<std::size_t> default_order;
  if (drop_order.empty()) {
    for (std::size_t c = candidates.size(); c > 1; --c) default_order.push_back(c - 1);
    drop_order = default_order;
  }
  for (std::size_t c : drop_order) {
    if (total <= max_tokens || kept <= 1) break;
    if (c >= candidates.size() || !keep[c]) continue;
    keep[c] = false;
    --kept;
    total -= log_tokens[c].size() + 1;
    out.dropped_logs.push_back(c);
  }
  // Still over: drop any remaining log from the tail, then truncate the survivor.
  for (std::size_t c = candidates.size(); c-- > 0 && total > max_tokens && kept > 1;) {
    if (!keep[c]) continue;
    keep[c] = false;
    --kept;
    total -= log_tokens[c].size() + 1;
    out.dropped_logs.push_back(c);
  }
  if (total > max_tokens) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (!keep[c]) continue;
      log_tokens[c].resize(log_tokens[c].size() - (total - max_tokens));
      out.truncated = true;
      total = max_tokens;
      break;
    }
  }
  std::sort(out.dropped_logs.begin(), out.dropped_logs.end());

  std::vector<std::string> texts;
  for (std::size_t c = 0; c < candidates.size(); ++c)
    if (keep[c]) {
      texts.push_back(candidates[c].content);
      out.packed_logs.push_back(c);
    }
  out.source_text = packed_source_text(question, texts);

  auto push = [&](std::string tok, std::size_t b, std::size_t e, Segment seg) {
    out.tokens.push_back(std::move(tok));
    out.char_spans.emplace_back(b, e);
    out.segments.push_back(seg);
  };
  push("[CLS]", 0, 0, {SegmentKind::Cls, -1});
  for (const auto& t : q_tokens) push(t.text, t.begin, t.end, {SegmentKind::Question, -1});
  std::size_t offset = question.size();
  push("[SEP]", offset, offset, {SegmentKind::Sep, -1});
  for (std::size_t li = 0; li < out.packed_logs.size(); ++li) {
    const std::size_t c = out.packed_logs[li];
    const std::size_t base = offset + 1;
    for (const auto& t : log_tokens[c])
      push(t.text, base + t.begin, base + t.end, {SegmentKind::Log, static_cast<int>(li)});
    offset = base + candidates[c].content.size();
    push("[SEP]", offset, offset, {SegmentKind::Sep, -1});
  }
  return out;
}

std::string span_text(const PackedInput& packed, std::size_t i, std::size_t j) {
  const auto b = packed.char_spans.at(i).first;
  const auto e = packed.char_spans.at(j).second;
  return normalize_ws(std::string_view(packed.source_text).substr(b, e - b));
}

std::vector<SpanCandidate> select_spans(const SpanLogits& logits, const PackedInput& packed,
                                        std::size_t k, std::size_t max_span_len) {
  const std::size_t n = packed.size();
  if (logits.start.size() != n || logits.end.size() != n)
    throw std::invalid_argument("select_spans: logits length differs from packed length");
  if (k == 0) throw std::invalid_argument("select_spans: k must be >= 1");
  if (max_span_len == 0) throw std::invalid_argument("select_spans: max_span_len must be >= 1");

  std::vector<std::size_t> eligible;
  for (std::size_t t = 0; t < n; ++t)
    if (packed.segments[t].kind == SegmentKind::Log) eligible.push_back(t);
  if (eligible.empty()) throw NoEligibleSpan("no log tokens in packed input");

  const auto p_start = masked_softmax(logits.start, eligible);
  const auto p_end = masked_softmax(logits.end, eligible);

  std::vector<ScoredSpan> all;
  std::vector<double> row;
  for (std::size_t i : eligible) {
    const int log = packed.segments[i].log;
    std::size_t stop = i;
    while (stop + 1 < n && stop + 1 - i < max_span_len && packed.segments[stop + 1].kind == SegmentKind::Log &&
           packed.segments[stop + 1].log == log)
      ++stop;
    const std::size_t len = stop - i + 1;
    row.resize(len);
    kernels::scale(std::span<const double>(p_end.data() + i, len), p_start[i], row);
    for (std::size_t d = 0; d < len; ++d) all.push_back({row[d], i, i + d});
  }
  std::sort(all.begin(), all.end(), [](const ScoredSpan& a, const ScoredSpan& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  std::vector<SpanCandidate> out;
  for (const auto& s : all) {
    if (out.size() >= k) break;
    const bool overlaps = std::any_of(out.begin(), out.end(), [&](const SpanCandidate& o) {
      return s.i <= o.j && o.i <= s.j;
    });
    if (overlaps) continue;
    out.push_back({s.i, s.j, s.score, span_text(packed, s.i, s.j)});
  }
  return out;
}

std::string render_answer(std::span<const SpanCandidate> spans, const PackedInput& packed) {
  std::vector<const SpanCandidate*> ordered;
  for (const auto& s : spans) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(), [&](const SpanCandidate* a, const SpanCandidate* b) {
    const auto ab = packed.char_spans.at(a->i).first;
    const auto bb = packed.char_spans.at(b->i).first;
    return ab != bb ? ab < bb : a->i < b->i;
  });
  std::string out;
  for (const auto* s : ordered) {
    const auto text = span_text(packed, s->i, s->j);
    if (text.empty()) continue;
    if (!out.empty()) out += ' ';
    out += text;
  }
  return out;
}

nlohmann::json to_json(const SpanRequest& request) {
  return {{"question", request.question}, {"logs", request.logs}, {"max_tokens", request.max_tokens}};
}

SpanResponse parse_span_response(const nlohmann::json& body, const SpanRequest& request) {
  auto fail = [](const std::string& why) -> SpanResponse {
    throw BackendUnavailable("span backend protocol violation: " + why, 1, 200, 0);
  };
  SpanResponse res;
  try {
    res.packed.tokens = body.at("tokens").get<std::vector<std::string>>();
    for (const auto& sp : body.at("char_spans")) {
      if (!sp.is_array() || sp.size() != 2) return fail("char_spans entries must be [start, end]");
      res.packed.char_spans.emplace_back(sp[0].get<std::size_t>(), sp[1].get<std::size_t>());
    }
    for (const auto& s : body.at("segment")) {
      auto seg = parse_segment(s.get<std::string>());
      if (!seg) return fail("unknown segment tag " + s.dump());
      res.packed.segments.push_back(*seg);
    }
    res.logits.start = body.at("start_logits").get<std::vector<double>>();
    res.logits.end = body.at("end_logits").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    return fail(e.what());
  }
  res.packed.source_text = packed_source_text(request.question, request.logs);
  if (res.logits.start.size() != res.packed.tokens.size() || res.logits.end.size() != res.packed.tokens.size())
    return fail("logit lengths differ from token count");
  if (auto why = check_packed(res.packed, request.max_tokens)) return fail(*why);

  // LOG(i) refers to request.logs[i]; renumber to packed order and record what was left out.
  std::vector<bool> seen(request.logs.size(), false);
  int last = -1;
  for (auto& seg : res.packed.segments) {
    if (seg.kind != SegmentKind::Log) continue;
    if (seg.log < 0 || static_cast<std::size_t>(seg.log) >= request.logs.size()) return fail("LOG index out of range");
    if (seg.log != last) {
      res.packed.packed_logs.push_back(static_cast<std::size_t>(seg.log));
      seen[seg.log] = true;
      last = seg.log;
    }
    seg.log = static_cast<int>(res.packed.packed_logs.size() - 1);
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) res.packed.dropped_logs.push_back(i);
  return res;
}

HttpSpanBackend::HttpSpanBackend(std::string url, HttpClientOptions options)
    : client_(std::move(url), options), max_in_flight_(options.max_in_flight) {}

SpanResponse HttpSpanBackend::query(const SpanRequest& request) const {
  return parse_span_response(client_.post(to_json(request)), request);
}

ExtractionResult extract(const LogSession& session, const Embedder* embedder, const SpanBackend* backend,
                         const ExtractConfig& config) {
  ExtractionResult res;
  res.selection = select_logs(session, embedder, config.selection);
  const auto& candidates = res.selection.candidates;

  if (!backend) {
    res.info = tfidf_baseline(candidates, config.baseline_words);
    return res;
  }

  std::vector<std::string> logs;
  logs.reserve(candidates.size());
  for (const auto& c : candidates) logs.push_back(c.content);

  auto ask = [&](PromptKind kind) {
    const SpanRequest req{std::string(question_for(kind)), logs, config.max_tokens};
    const auto response = backend->query(req);
    auto spans = select_spans(response.logits, response.packed, config.top_k, config.max_span_len);
    return std::make_pair(render_answer(spans, response.packed), std::move(spans));
  };

  auto fall_back = [&](const std::exception& e) {
    res.info = tfidf_baseline(candidates, config.baseline_words);
    res.degraded = true;
    res.error = e.what();
  };

  try {
    auto fip_future = std::async(std::launch::async, ask, PromptKind::Fip);
    auto [fid_text, fid_spans] = ask(PromptKind::Fid);
    auto [fip_text, fip_spans] = fip_future.get();
    if (fid_text.empty()) throw NoEligibleSpan("backend produced an empty FID answer");
    res.info.fid = std::move(fid_text);
    res.info.fid_spans = std::move(fid_spans);
    const double best_fip = fip_spans.empty() ? 0.0 : fip_spans.front().score;
    if (!fip_text.empty() && best_fip >= config.fip_min_score) res.info.fip = std::move(fip_text);
    res.info.fip_spans = std::move(fip_spans);
  } catch (const BackendUnavailable& e) {
    if (!config.allow_fallback) throw;
    fall_back(e);
  } catch (const NoEligibleSpan& e) {
    if (!config.allow_fallback) throw;
    fall_back(e);
  }
  return res;
}

}  // namespace lofi
