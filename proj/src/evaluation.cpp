#include "lofi/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

#include "lofi/error.hpp"

namespace lofi {

namespace {

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

EvalScores make_scores(double p, double r) {
  return {p, r, p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0};
}

EvalScores macro(const std::vector<EvalScores>& xs) {
  EvalScores m;
  if (xs.empty()) return m;
  for (const auto& s : xs) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const double n = static_cast<double>(xs.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json scores_json(const EvalScores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_punct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > b) {
      std::string tok(text.substr(b, e - b));
      for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

EvalScores token_f1(std::string_view prediction, std::string_view gold) {
  const auto gold_tokens = normalize_tokens(gold);
  if (gold_tokens.empty()) throw std::invalid_argument("token_f1: gold answer is empty");
  const auto pred_tokens = normalize_tokens(prediction);
  if (pred_tokens.empty()) return {};
  std::map<std::string, std::size_t> gold_counts;
  for (const auto& t : gold_tokens) ++gold_counts[t];
  std::size_t shared = 0;
  for (const auto& t : pred_tokens) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++shared;
    }
  }
  return make_scores(static_cast<double>(shared) / static_cast<double>(pred_tokens.size()),
                     static_cast<double>(shared) / static_cast<double>(gold_tokens.size()));
}

bool selection_carries(const SelectionResult& selection, const FaultInfo& gold) {
  auto carried = [&](const std::string& needle) {
    return std::any_of(selection.candidates.begin(), selection.candidates.end(),
                       [&](const LogRecord& r) { return r.content.find(needle) != std::string::npos; });
  };
  if (!carried(gold.fid)) return false;
  return !gold.fip || carried(*gold.fip);
}

DatasetReport evaluate_dataset(const std::vector<FaultInfo>& predictions, const std::vector<FaultInfo>& golds,
                               const std::vector<SelectionResult>& selections, MissingFipPolicy policy,
                               const std::vector<std::string>& case_ids) {
  if (predictions.size() != golds.size())
    throw InputError("prediction count " + std::to_string(predictions.size()) + " != gold count " +
                     std::to_string(golds.size()));
  if (!selections.empty() && selections.size() != golds.size())
    throw InputError("selection count " + std::to_string(selections.size()) + " != gold count " +
                     std::to_string(golds.size()));
  if (!case_ids.empty() && case_ids.size() != golds.size()) throw InputError("case id count mismatch");

  DatasetReport report;
  std::vector<EvalScores> fid_all, fip_all;
  double cr_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < golds.size(); ++k) {
    ExampleReport ex;
    ex.case_id = case_ids.empty() ? std::to_string(k) : case_ids[k];
    ex.fid = token_f1(predictions[k].fid, golds[k].fid);
    fid_all.push_back(ex.fid);

    const auto& gold_fip = golds[k].fip;
    const bool gold_has_fip = gold_fip && !normalize_tokens(*gold_fip).empty();
    if (gold_has_fip) {
      ex.fip = token_f1(predictions[k].fip.value_or(""), *gold_fip);
    } else if (policy == MissingFipPolicy::ScoreEmpty) {
      const bool abstained = !predictions[k].fip || normalize_tokens(*predictions[k].fip).empty();
      ex.fip = abstained ? EvalScores{1.0, 1.0, 1.0} : EvalScores{};
    }
    if (ex.fip) {
      fip_all.push_back(*ex.fip);
      ++report.fip_evaluated;
    } else {
      ++report.fip_skipped;
    }

    if (!selections.empty()) {
      ex.compression = selections[k].compression_ratio();
      ex.selection_correct = selection_carries(selections[k], golds[k]);
      cr_sum += ex.compression;
      correct += ex.selection_correct ? 1 : 0;
    }
    report.examples.push_back(std::move(ex));
  }
  report.fid_macro = macro(fid_all);
  report.fip_macro = macro(fip_all);
  if (!selections.empty() && !golds.empty()) {
    report.compression_ratio = cr_sum / static_cast<double>(golds.size());
    report.selection_accuracy = static_cast<double>(correct) / static_cast<double>(golds.size());
  }
  return report;
}

nlohmann::json to_json(const DatasetReport& report) {
  nlohmann::json j;
  j["normalization"] = report.normalization;
  j["n_examples"] = report.examples.size();
  j["fid"] = scores_json(report.fid_macro);
  j["fip"] = scores_json(report.fip_macro);
  j["fip_evaluated"] = report.fip_evaluated;
  j["fip_skipped"] = report.fip_skipped;
  j["compression_ratio"] = report.compression_ratio;
  j["selection_accuracy"] = report.selection_accuracy;
  auto& rows = j["examples"] = nlohmann::json::array();
  for (const auto& ex : report.examples) {
    nlohmann::json row{{"case_id", ex.case_id},
                       {"fid", scores_json(ex.fid)},
                       {"fip", ex.fip ? scores_json(*ex.fip) : nlohmann::json(nullptr)},
                       {"compression", ex.compression},
                       {"selection_correct", ex.selection_correct}};
    rows.push_back(std::move(row));
  }
  return j;
}

std::string to_table(const DatasetReport& r) {
  std::ostringstream os;
  os << "# normalization: " << r.normalization << "\n";
  os << "metric      precision  recall     f1         n\n";
  auto line = [&](const char* name, const EvalScores& s, std::size_t n) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-11s %-10s %-10s %-10s %zu\n", name, fixed(s.precision).c_str(),
                  fixed(s.recall).c_str(), fixed(s.f1).c_str(), n);
    os << buf;
  };
  line("FID", r.fid_macro, r.examples.size());
  line("FIP", r.fip_macro, r.fip_evaluated);
  os << "compression_ratio   " << fixed(r.compression_ratio) << "\n";
  os << "selection_accuracy  " << fixed(r.selection_accuracy) << "\n";
  os << "fip_skipped         " << r.fip_skipped << "\n";
  return os.str();
}

std::string to_csv(const DatasetReport& r) {
  std::ostringstream os;
  os << "case_id,fid_precision,fid_recall,fid_f1,fip_precision,fip_recall,fip_f1,compression,selection_correct\n";
  for (const auto& ex : r.examples) {
    os << csv_field(ex.case_id) << ',' << fixed(ex.fid.precision) << ',' << fixed(ex.fid.recall) << ','
       << fixed(ex.fid.f1) << ',';
    if (ex.fip)
      os << fixed(ex.fip->precision) << ',' << fixed(ex.fip->recall) << ',' << fixed(ex.fip->f1);
    else
      os << ",,";
    os << ',' << fixed(ex.compression) << ',' << (ex.selection_correct ? 1 : 0) << "\n";
  }
  return os.str();
}

}  // namespace lofi
