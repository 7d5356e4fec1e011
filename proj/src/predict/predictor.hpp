#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/vocabulary.hpp"
#include "predict/rouge.hpp"

namespace lap::predict {

/// A decoded caption with the captioner's mean token NLL.
struct ScoredCaption {
  core::Tokens tokens;
  double nll = 0.0;
};

struct Candidate {
  int action_id = 0;
  core::Tokens description;
};

/// Action(id) when `action` is set, Unknown otherwise.
struct Prediction {
  std::optional<int> action;
  double best_score = 0.0;
  std::optional<int> matched_caption;
  bool randomized = false;

  bool is_unknown() const { return !action.has_value(); }
};

std::vector<Candidate> task_candidates(const core::ActionVocabulary& vocab, int task_id);
std::vector<Candidate> all_candidates(const core::ActionVocabulary& vocab);

/// Scores every (caption, candidate) pair with ROUGE-1 of the caption against
/// the candidate's description. The best pair wins if its score reaches
/// `threshold`; ties go to the lowest action id, then the lowest caption
/// index. Otherwise the prediction is Unknown.
Prediction predict_action(std::span<const ScoredCaption> captions, std::span<const Candidate> candidates,
                          double threshold = 0.5, RougeVariant variant = RougeVariant::Precision);

/// Unknown becomes a uniformly drawn action; Action passes through.
Prediction randomize_unknown(const Prediction& prediction, int num_actions, std::uint64_t seed);

}  // namespace lap::predict
