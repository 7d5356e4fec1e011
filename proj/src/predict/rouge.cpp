#include "predict/rouge.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace lap::predict {

RougeVariant parse_rouge_variant(std::string_view text) {
  if (text == "precision") return RougeVariant::Precision;
  if (text == "recall") return RougeVariant::Recall;
  if (text == "f1") return RougeVariant::F1;
  fail(ErrorCode::InvalidArgument, "unknown ROUGE variant '" + std::string(text) + "' (expected precision, recall or f1)");
}

const char* to_string(RougeVariant variant) {
  switch (variant) {
    case RougeVariant::Precision: return "precision";
    case RougeVariant::Recall: return "recall";
    case RougeVariant::F1: return "f1";
  }
  return "?";
}

namespace {

using NGram = std::vector<std::string_view>;

std::map<NGram, int> count_ngrams(const core::Tokens& tokens, int n) {
  std::map<NGram, int> counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    NGram g(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i) + n);
    ++counts[g];
  }
  return counts;
}

int ngram_total(const core::Tokens& tokens, int n) {
  return std::max(0, static_cast<int>(tokens.size()) - n + 1);
}

}  // namespace

int ngram_overlap(const core::Tokens& candidate, const core::Tokens& reference, int n) {
  require(n >= 1, ErrorCode::InvalidArgument, "n-gram order must be >= 1");
  const auto cand = count_ngrams(candidate, n);
  const auto ref = count_ngrams(reference, n);
  int overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

double rouge_n(const core::Tokens& candidate, const core::Tokens& reference, int n, RougeVariant variant) {
  require(!reference.empty(), ErrorCode::InvalidArgument, "ROUGE reference is empty");
  const int cand_total = ngram_total(candidate, n);
  const int ref_total = ngram_total(reference, n);
  if (cand_total == 0 || ref_total == 0) return 0.0;
  const double overlap = ngram_overlap(candidate, reference, n);
  switch (variant) {
    case RougeVariant::Precision: return overlap / cand_total;
    case RougeVariant::Recall: return overlap / ref_total;
    // Harmonic mean of overlap/cand and overlap/ref, kept in integer form.
    case RougeVariant::F1: return 2.0 * overlap / (cand_total + ref_total);
  }
  return 0.0;
}

}  // namespace lap::predict
