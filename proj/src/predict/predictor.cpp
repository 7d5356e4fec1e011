#include "predict/predictor.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace lap::predict {

std::vector<Candidate> task_candidates(const core::ActionVocabulary& vocab, int task_id) {
  std::vector<int> ids = vocab.task_actions(task_id);
  std::sort(ids.begin(), ids.end());
  std::vector<Candidate> out;
  for (int id : ids) out.push_back(Candidate{id, vocab.action(id).description});
  return out;
}

std::vector<Candidate> all_candidates(const core::ActionVocabulary& vocab) {
  std::vector<Candidate> out;
  for (const auto& a : vocab.actions()) out.push_back(Candidate{a.id, a.description});
  return out;
}

Prediction predict_action(std::span<const ScoredCaption> captions, std::span<const Candidate> candidates,
                          double threshold, RougeVariant variant) {
  require(!captions.empty(), ErrorCode::InvalidArgument, "no captions to match");
  require(!candidates.empty(), ErrorCode::InvalidArgument, "no candidate actions");
  int best_action = -1;
  int best_caption = -1;
  double best = -1.0;
  for (const auto& cand : candidates) {
    for (std::size_t c = 0; c < captions.size(); ++c) {
      const double score = rouge1(captions[c].tokens, cand.description, variant);
      const bool better = score > best ||
                          (score == best && (cand.action_id < best_action ||
                                             (cand.action_id == best_action && static_cast<int>(c) < best_caption)));
      if (better) {
        best = score;
        best_action = cand.action_id;
        best_caption = static_cast<int>(c);
      }
    }
  }
  Prediction p;
  p.best_score = best;
  if (best >= threshold) {
    p.action = best_action;
    p.matched_caption = best_caption;
  }
  return p;
}

Prediction randomize_unknown(const Prediction& prediction, int num_actions, std::uint64_t seed) {
  if (!prediction.is_unknown()) return prediction;
  require(num_actions >= 1, ErrorCode::InvalidArgument, "vocabulary is empty");
  Rng rng = make_rng(seed, "random-label");
  Prediction out = prediction;
  out.action = uniform_int(rng, 0, num_actions - 1);
  out.randomized = true;
  return out;
}

}  // namespace lap::predict
