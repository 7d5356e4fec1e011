#include "caption/model.hpp"

#include <cmath>

#include "caption/discriminator.hpp"
#include "common/error.hpp"
#include "common/numeric.hpp"

namespace lap::caption {

const char* to_string(GenerationMode mode) {
  return mode == GenerationMode::TeacherForced ? "teacher_forced" : "free_run";
}

CaptionModel::CaptionModel(int feature_dim, int vocab_size, int hidden, std::uint64_t seed)
    : feature_dim_(feature_dim), vocab_size_(vocab_size), hidden_(hidden) {
  require(feature_dim > 0 && vocab_size > TokenVocabulary::kNumSpecial && hidden > 0,
          ErrorCode::InvalidArgument, "caption model dimensions must be positive");
  params.add("cap.obs", hidden, feature_dim);
  params.add("cap.embed", hidden, vocab_size);
  params.add("cap.rec", hidden, hidden);
  params.add("cap.bias", hidden, 1);
  params.add("cap.out", vocab_size, hidden);
  params.add("cap.out_bias", vocab_size, 1);
  params.fill_gaussian(seed);
  params[kEmbed].mat() *= std::sqrt(static_cast<double>(vocab_size)) * 0.5;
  params[kRec].mat() *= 0.5;
}

Eigen::VectorXd CaptionModel::condition(const Eigen::VectorXd& obs) const {
  require(obs.size() == feature_dim_, ErrorCode::InvalidArgument,
          "observation has dimension " + std::to_string(obs.size()) + ", expected " +
              std::to_string(feature_dim_));
  return params[kObs].mat() * obs + params[kBias].vec();
}

Eigen::VectorXd CaptionModel::step(const Eigen::VectorXd& prev, int input, const Eigen::VectorXd& cond) const {
  return (params[kRec].mat() * prev + params[kEmbed].mat().col(input) + cond).array().tanh();
}

Eigen::VectorXd CaptionModel::log_probs(const Eigen::VectorXd& h) const {
  Eigen::VectorXd z = params[kOut].mat() * h + params[kOutBias].vec();
  return z.array() - log_sum_exp(z);
}

int sample_token(const Eigen::VectorXd& log_probs, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < log_probs.size(); ++i) {
    cumulative += std::exp(log_probs[i]);
    if (u < cumulative) return static_cast<int>(i);
  }
  // Rounding left the cumulative mass just below u; take the most likely token.
  Eigen::Index best = 0;
  log_probs.maxCoeff(&best);
  return static_cast<int>(best);
}

LossParts captioner_loss(const CaptionModel& model, const Discriminator* disc,
                         std::span<const CaptionItem> items, double w, AdversarialPath path,
                         ParameterSet* grads) {
  require(!items.empty(), ErrorCode::InvalidArgument, "captioner batch is empty");
  const bool adversarial = disc != nullptr && w != 0.0;
  const int vocab = model.vocab_size();
  const double batch_scale = 1.0 / static_cast<double>(items.size());
  const auto& p = model.params;

  std::vector<double> ce_terms, adv_terms;
  for (const auto& item : items) {
    const std::size_t len = item.inputs.size();
    require(len > 0 && item.targets.size() == len, ErrorCode::InvalidArgument,
            "caption item inputs and targets must be non-empty and aligned");
    require(!adversarial || item.generated.size() == len, ErrorCode::InvalidArgument,
            "caption item is missing generated tokens");
    const Eigen::VectorXd cond = model.condition(item.obs);

    std::vector<Eigen::VectorXd> hs(len + 1, Eigen::VectorXd::Zero(model.hidden()));
    std::vector<Eigen::VectorXd> probs(len);
    double ce = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      hs[t + 1] = model.step(hs[t], item.inputs[t], cond);
      const Eigen::VectorXd lp = model.log_probs(hs[t + 1]);
      ce -= lp[item.targets[t]];
      probs[t] = lp.array().exp();
    }
    ce /= static_cast<double>(len);
    ce_terms.push_back(ce);

    Eigen::VectorXd d_pooled;
    if (adversarial) {
      Eigen::VectorXd pooled = Eigen::VectorXd::Zero(vocab);
      for (std::size_t t = 0; t < len; ++t) {
        if (path == AdversarialPath::Relaxed) pooled += probs[t];
        else pooled[item.generated[t]] += 1.0;
      }
      pooled /= static_cast<double>(len);
      // The captioner wants its generations labelled as teacher forced.
      adv_terms.push_back(disc->bce(pooled, item.obs, 1.0, nullptr, 0.0, grads ? &d_pooled : nullptr));
    }
    if (!grads) continue;

    auto& g = *grads;
    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(model.hidden());
    Eigen::VectorXd d_cond = Eigen::VectorXd::Zero(model.hidden());
    const double pos_scale = batch_scale / static_cast<double>(len);
    for (std::size_t t = len; t-- > 0;) {
      Eigen::VectorXd d_logits = probs[t];
      d_logits[item.targets[t]] -= 1.0;
      d_logits *= pos_scale;
      if (adversarial) {
        // Softmax Jacobian applied to dL_A/dq_t = d_pooled / len.
        const Eigen::VectorXd gq = d_pooled * (w * pos_scale);
        d_logits += (probs[t].array() * (gq.array() - probs[t].dot(gq))).matrix();
      }
      g[CaptionModel::kOut].mat() += d_logits * hs[t + 1].transpose();
      g[CaptionModel::kOutBias].vec() += d_logits;
      const Eigen::VectorXd dh = p[CaptionModel::kOut].mat().transpose() * d_logits + dh_next;
      const Eigen::VectorXd da = dh.array() * (1.0 - hs[t + 1].array().square());
      g[CaptionModel::kRec].mat() += da * hs[t].transpose();
      g[CaptionModel::kEmbed].mat().col(item.inputs[t]) += da;
      d_cond += da;
      dh_next = p[CaptionModel::kRec].mat().transpose() * da;
    }
    g[CaptionModel::kObs].mat() += d_cond * item.obs.transpose();
    g[CaptionModel::kBias].vec() += d_cond;
  }

  LossParts parts;
  parts.token_ce = pairwise_mean(ce_terms);
  parts.adversarial = adversarial ? pairwise_mean(adv_terms) : 0.0;
  parts.total = parts.token_ce + (adversarial ? w * parts.adversarial : 0.0);
  return parts;
}

CaptionItem make_item(const CaptionModel& model, const Eigen::VectorXd& obs, std::span<const int> gt,
                      GenerationMode mode, Rng& rng) {
  CaptionItem item;
  item.obs = obs;
  item.mode = mode;
  item.targets.assign(gt.begin(), gt.end());
  item.targets.push_back(TokenVocabulary::kEos);
  const std::size_t len = item.targets.size();
  const Eigen::VectorXd cond = model.condition(obs);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(model.hidden());
  int input = TokenVocabulary::kBos;
  for (std::size_t t = 0; t < len; ++t) {
    item.inputs.push_back(input);
    h = model.step(h, input, cond);
    const int drawn = sample_token(model.log_probs(h), rng);
    item.generated.push_back(drawn);
    input = mode == GenerationMode::TeacherForced ? item.targets[t] : drawn;
  }
  return item;
}

GeneratedCaption forward_generate(const CaptionModel& model, const Eigen::VectorXd& obs,
                                  GenerationMode mode, const std::optional<std::vector<int>>& gt,
                                  std::uint64_t seed, int max_length) {
  require(mode == GenerationMode::FreeRun || gt.has_value(), ErrorCode::InvalidArgument,
          "teacher forcing requires ground-truth tokens");
  Rng rng(seed);
  GeneratedCaption out;
  out.mode = mode;
  if (gt) {
    const CaptionItem item = make_item(model, obs, *gt, mode, rng);
    out.tokens = item.generated;
    out.nll = captioner_loss(model, nullptr, std::span(&item, 1), 0.0, AdversarialPath::StraightThrough,
                             nullptr).token_ce;
    return out;
  }
  require(max_length >= 1, ErrorCode::InvalidArgument, "max_length must be >= 1");
  const Eigen::VectorXd cond = model.condition(obs);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(model.hidden());
  int input = TokenVocabulary::kBos;
  double nll = 0.0;
  for (int t = 0; t < max_length; ++t) {
    h = model.step(h, input, cond);
    const Eigen::VectorXd lp = model.log_probs(h);
    const int drawn = sample_token(lp, rng);
    nll -= lp[drawn];
    out.tokens.push_back(drawn);
    if (drawn == TokenVocabulary::kEos) break;
    input = drawn;
  }
  out.nll = std::max(0.0, nll / static_cast<double>(out.tokens.size()));
  return out;
}

std::vector<GeneratedCaption> sample_descriptions(const CaptionModel& model, const Eigen::VectorXd& obs,
                                                  int count, std::uint64_t seed, int max_length) {
  require(count >= 1, ErrorCode::InvalidArgument, "need at least one description");
  std::vector<GeneratedCaption> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(forward_generate(model, obs, GenerationMode::FreeRun, std::nullopt,
                                   derive_seed(seed, "describe", static_cast<std::uint64_t>(i)), max_length));
  }
  return out;
}

Checkpoint to_checkpoint(const CaptionModel& model, const TokenVocabulary& tokens, const Discriminator* disc) {
  Checkpoint c;
  c.params = model.params;
  if (disc) {
    for (const auto& t : disc->params.tensors()) {
      const int idx = c.params.add(t.name, t.rows, t.cols);
      c.params[idx].data = t.data;
    }
  }
  c.meta["kind"] = "captioner";
  c.meta["feature_dim"] = std::to_string(model.feature_dim());
  c.meta["vocab_size"] = std::to_string(model.vocab_size());
  c.meta["hidden"] = std::to_string(model.hidden());
  std::string words;
  for (int i = TokenVocabulary::kNumSpecial; i < tokens.size(); ++i) {
    if (!words.empty()) words += ' ';
    words += tokens.word(i);
  }
  c.meta["tokens"] = words;
  return c;
}

CaptionModel caption_model_from_checkpoint(const Checkpoint& checkpoint) {
  auto get = [&](const std::string& key) {
    auto it = checkpoint.meta.find(key);
    require(it != checkpoint.meta.end(), ErrorCode::Parse, "captioner checkpoint lacks meta " + key);
    return std::stoi(it->second);
  };
  require(checkpoint.meta.count("kind") && checkpoint.meta.at("kind") == "captioner", ErrorCode::Parse,
          "checkpoint is not a captioner");
  CaptionModel model(get("feature_dim"), get("vocab_size"), get("hidden"));
  for (auto& t : model.params.tensors()) {
    const auto& src = checkpoint.params.at(t.name);
    require(src.rows == t.rows && src.cols == t.cols, ErrorCode::Parse, "shape mismatch for " + t.name);
    t.data = src.data;
  }
  return model;
}

TokenVocabulary token_vocabulary_from_checkpoint(const Checkpoint& checkpoint) {
  auto it = checkpoint.meta.find("tokens");
  require(it != checkpoint.meta.end(), ErrorCode::Parse, "captioner checkpoint lacks its token table");
  return TokenVocabulary::from_words(core::tokenize(it->second));
}

}  // namespace lap::caption
