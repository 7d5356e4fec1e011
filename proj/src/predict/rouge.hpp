#pragma once

#include <string_view>

#include "core/vocabulary.hpp"

namespace lap::predict {

enum class RougeVariant { Precision, Recall, F1 };

RougeVariant parse_rouge_variant(std::string_view text);
const char* to_string(RougeVariant variant);

/// Clipped n-gram overlap: sum over n-grams g of min(count_cand(g), count_ref(g)).
int ngram_overlap(const core::Tokens& candidate, const core::Tokens& reference, int n);

/// ROUGE-N. Precision divides the overlap by the candidate's n-gram count,
/// recall by the reference's; F1 is their harmonic mean. A candidate (or
/// reference) too short to contain an n-gram scores 0. Throws on an empty
/// reference.
double rouge_n(const core::Tokens& candidate, const core::Tokens& reference, int n, RougeVariant variant);

inline double rouge1(const core::Tokens& candidate, const core::Tokens& reference, RougeVariant variant) {
  return rouge_n(candidate, reference, 1, variant);
}

inline double rouge2(const core::Tokens& candidate, const core::Tokens& reference, RougeVariant variant) {
  return rouge_n(candidate, reference, 2, variant);
}

}  // namespace lap::predict
