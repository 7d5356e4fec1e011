#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "common/rng.hpp"
#include "common/tensor.hpp"
#include "caption/tokens.hpp"

namespace lap::caption {

class Discriminator;

enum class GenerationMode { TeacherForced, FreeRun };

const char* to_string(GenerationMode mode);

struct GeneratedCaption {
  std::vector<int> tokens;  // ends with EOS unless the length cap was hit
  double nll = 0.0;         // mean per-token negative log-likelihood
  GenerationMode mode = GenerationMode::FreeRun;
};

/// Single-layer Elman recurrence with additive observation conditioning:
///   h_t = tanh(W_rec h_{t-1} + E[:, x_t] + W_obs obs + b)
///   p(. | x_<=t, obs) = softmax(W_out h_t + c)
class CaptionModel {
 public:
  enum Tensor : int { kObs, kEmbed, kRec, kBias, kOut, kOutBias };

  CaptionModel() = default;
  CaptionModel(int feature_dim, int vocab_size, int hidden = 64, std::uint64_t seed = 0);

  int feature_dim() const { return feature_dim_; }
  int vocab_size() const { return vocab_size_; }
  int hidden() const { return hidden_; }

  Eigen::VectorXd condition(const Eigen::VectorXd& obs) const;
  /// Next hidden state for input token `input`.
  Eigen::VectorXd step(const Eigen::VectorXd& prev, int input, const Eigen::VectorXd& cond) const;
  /// Log-probabilities over the token table from a hidden state.
  Eigen::VectorXd log_probs(const Eigen::VectorXd& h) const;

  ParameterSet params;

 private:
  int feature_dim_ = 0;
  int vocab_size_ = 0;
  int hidden_ = 0;
};

/// A fixed input/target sequence for one observation. `generated` holds the
/// tokens the discriminator sees (the model's own draws at every position).
struct CaptionItem {
  Eigen::VectorXd obs;
  std::vector<int> inputs;
  std::vector<int> targets;
  std::vector<int> generated;
  GenerationMode mode = GenerationMode::TeacherForced;
};

struct LossParts {
  double token_ce = 0.0;    // L_c
  double adversarial = 0.0; // generator side of L_A
  double total = 0.0;       // L_c + w * L_A
};

/// How the adversarial term reaches the captioner's logits.
///   StraightThrough: the discriminator sees one-hot generated tokens; the
///     backward pass treats them as the softmax probabilities.
///   Relaxed: the discriminator sees the probabilities themselves, making the
///     objective differentiable (used for gradient checking).
enum class AdversarialPath { StraightThrough, Relaxed };

/// Mean over `items` of L_c + w * BCE(D(generated), teacher label). The
/// adversarial term is skipped when `disc` is null or w == 0. Gradients of
/// the mean are accumulated into `grads` when non-null.
LossParts captioner_loss(const CaptionModel& model, const Discriminator* disc,
                         std::span<const CaptionItem> items, double w, AdversarialPath path,
                         ParameterSet* grads);

/// Draws a token from log-probabilities with one uniform draw.
int sample_token(const Eigen::VectorXd& log_probs, Rng& rng);

/// Builds the fixed sequence a training iteration scores. Teacher forcing
/// feeds the ground truth; free running feeds the model's own draws. Targets
/// are always `gt` followed by EOS.
CaptionItem make_item(const CaptionModel& model, const Eigen::VectorXd& obs, std::span<const int> gt,
                      GenerationMode mode, Rng& rng);

/// Teacher forcing requires `gt`. With `gt` the NLL scores the ground truth
/// under the chosen inputs; without it (free running only) the NLL scores the
/// model's own draws, stopping at EOS or `max_length`.
GeneratedCaption forward_generate(const CaptionModel& model, const Eigen::VectorXd& obs,
                                  GenerationMode mode, const std::optional<std::vector<int>>& gt,
                                  std::uint64_t seed, int max_length = 32);

/// M free-running draws; draw i uses a sub-seed derived from (seed, i).
std::vector<GeneratedCaption> sample_descriptions(const CaptionModel& model, const Eigen::VectorXd& obs,
                                                  int count, std::uint64_t seed, int max_length = 32);

/// Captioner (and optionally discriminator) weights plus the token table.
Checkpoint to_checkpoint(const CaptionModel& model, const TokenVocabulary& tokens,
                         const Discriminator* disc = nullptr);
CaptionModel caption_model_from_checkpoint(const Checkpoint& checkpoint);
TokenVocabulary token_vocabulary_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace lap::caption
