#include "caption/discriminator.hpp"

#include "caption/model.hpp"
#include "common/error.hpp"
#include "common/numeric.hpp"

namespace lap::caption {

Discriminator::Discriminator(int vocab_size, int feature_dim, int embed_dim, int hidden,
                             std::uint64_t seed)
    : vocab_size_(vocab_size), feature_dim_(feature_dim) {
  params.add("disc.token_embed", embed_dim, vocab_size);
  params.add("disc.obs_proj", embed_dim, feature_dim);
  params.add("disc.hidden", hidden, 2 * embed_dim);
  params.add("disc.hidden_bias", hidden, 1);
  params.add("disc.out", 1, hidden);
  params.add("disc.out_bias", 1, 1);
  params.fill_gaussian(seed);
  // Token embedding sees a mean of one-hots, so give it unit-scale columns.
  params[kTokenEmbed].mat() *= std::sqrt(static_cast<double>(vocab_size));
}

namespace {

struct DiscForward {
  Eigen::VectorXd input;
  Eigen::VectorXd hidden;
  double logit = 0.0;
};

DiscForward run(const Discriminator& d, const Eigen::VectorXd& pooled, const Eigen::VectorXd& obs) {
  const auto& p = d.params;
  const int e = p[Discriminator::kTokenEmbed].rows;
  DiscForward f;
  f.input.resize(2 * e);
  f.input.head(e) = p[Discriminator::kTokenEmbed].mat() * pooled;
  f.input.tail(e) = p[Discriminator::kObsProj].mat() * obs;
  f.hidden = (p[Discriminator::kHidden].mat() * f.input + p[Discriminator::kHiddenBias].vec()).array().tanh();
  f.logit = (p[Discriminator::kOut].mat() * f.hidden)(0) + p[Discriminator::kOutBias].data[0];
  return f;
}

}  // namespace

double Discriminator::logit(const Eigen::VectorXd& pooled_tokens, const Eigen::VectorXd& obs) const {
  return run(*this, pooled_tokens, obs).logit;
}

double Discriminator::bce(const Eigen::VectorXd& pooled_tokens, const Eigen::VectorXd& obs, double label,
                          ParameterSet* grads, double scale, Eigen::VectorXd* d_pooled) const {
  const auto f = run(*this, pooled_tokens, obs);
  const double loss = bce_with_logit(f.logit, label);
  if (!grads && !d_pooled) return loss;

  const int e = params[kTokenEmbed].rows;
  const double d_logit = sigmoid(f.logit) - label;
  const Eigen::VectorXd d_hidden = d_logit * params[kOut].mat().transpose();
  const Eigen::VectorXd d_pre = d_hidden.array() * (1.0 - f.hidden.array().square());
  const Eigen::VectorXd d_input = params[kHidden].mat().transpose() * d_pre;
  if (grads) {
    auto& g = *grads;
    g[kOutBias].data[0] += scale * d_logit;
    g[kOut].mat() += scale * d_logit * f.hidden.transpose();
    g[kHiddenBias].vec() += scale * d_pre;
    g[kHidden].mat() += scale * d_pre * f.input.transpose();
    g[kTokenEmbed].mat() += scale * d_input.head(e) * pooled_tokens.transpose();
    g[kObsProj].mat() += scale * d_input.tail(e) * obs.transpose();
  }
  if (d_pooled) *d_pooled = params[kTokenEmbed].mat().transpose() * d_input.head(e);
  return loss;
}

Eigen::VectorXd pool_tokens(std::span<const int> tokens, int vocab_size) {
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(vocab_size);
  if (tokens.empty()) return pooled;
  for (int t : tokens) {
    require(t >= 0 && t < vocab_size, ErrorCode::InvalidArgument, "token id out of range");
    pooled[t] += 1.0;
  }
  return pooled / static_cast<double>(tokens.size());
}

double discriminator_loss(const Discriminator& disc, std::span<const GeneratedCaption> captions,
                          std::span<const Eigen::VectorXd> obs, std::span<const int> labels,
                          ParameterSet* grads) {
  require(!captions.empty(), ErrorCode::InvalidArgument, "discriminator batch is empty");
  require(captions.size() == obs.size() && captions.size() == labels.size(), ErrorCode::InvalidArgument,
          "discriminator batch: captions, observations and labels differ in length");
  const double scale = 1.0 / static_cast<double>(captions.size());
  std::vector<double> losses;
  losses.reserve(captions.size());
  for (std::size_t i = 0; i < captions.size(); ++i) {
    require(labels[i] == 0 || labels[i] == 1, ErrorCode::InvalidArgument, "labels must be 0 or 1");
    const auto pooled = pool_tokens(captions[i].tokens, disc.vocab_size());
    losses.push_back(disc.bce(pooled, obs[i], labels[i], grads, scale, nullptr));
  }
  return pairwise_mean(losses);
}

double discriminator_step(Discriminator& disc, Adam& optimizer, double lr,
                          std::span<const GeneratedCaption> captions,
                          std::span<const Eigen::VectorXd> obs, std::span<const int> labels) {
  ParameterSet grads = disc.params.zeros_like();
  const double loss = discriminator_loss(disc, captions, obs, labels, &grads);
  require(std::isfinite(loss), ErrorCode::Numeric, "discriminator loss is not finite");
  optimizer.step(disc.params, grads, lr);
  return loss;
}

}  // namespace lap::caption
