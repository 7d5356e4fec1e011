#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "common/optim.hpp"
#include "common/tensor.hpp"

namespace lap::caption {

struct GeneratedCaption;

/// Tells teacher-forced generations (label 1) from free-running ones
/// (label 0). Input: the mean one-hot (or probability) vector of the
/// generated tokens, embedded, concatenated with a projection of the
/// observation, then a tanh perceptron with a single output logit.
class Discriminator {
 public:
  enum Tensor : int { kTokenEmbed, kObsProj, kHidden, kHiddenBias, kOut, kOutBias };

  Discriminator() = default;
  Discriminator(int vocab_size, int feature_dim, int embed_dim = 32, int hidden = 32,
                std::uint64_t seed = 0);

  int vocab_size() const { return vocab_size_; }
  int feature_dim() const { return feature_dim_; }

  double logit(const Eigen::VectorXd& pooled_tokens, const Eigen::VectorXd& obs) const;

  /// BCE of the logit against `label`. Accumulates `scale` times the
  /// parameter gradient into `grads` and writes dBCE/dpooled (unscaled) into
  /// `d_pooled` when non-null.
  double bce(const Eigen::VectorXd& pooled_tokens, const Eigen::VectorXd& obs, double label,
             ParameterSet* grads, double scale, Eigen::VectorXd* d_pooled) const;

  ParameterSet params;

 private:
  int vocab_size_ = 0;
  int feature_dim_ = 0;
};

/// Mean one-hot vector of a token sequence.
Eigen::VectorXd pool_tokens(std::span<const int> tokens, int vocab_size);

/// Mean BCE over the batch; when `grads` is non-null it receives the
/// gradient of that mean.
double discriminator_loss(const Discriminator& disc, std::span<const GeneratedCaption> captions,
                          std::span<const Eigen::VectorXd> obs, std::span<const int> labels,
                          ParameterSet* grads);

/// One optimiser step on the mean BCE. Returns the loss before the update.
double discriminator_step(Discriminator& disc, Adam& optimizer, double lr,
                          std::span<const GeneratedCaption> captions,
                          std::span<const Eigen::VectorXd> obs, std::span<const int> labels);

}  // namespace lap::caption
