#include "diffusion/planner.hpp"

#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "common/numeric.hpp"
#include "common/optim.hpp"
#include "common/rng.hpp"

namespace lap::diffusion {

void PlannerConfig::validate() const {
  require(diffusion_steps >= 1 && epochs >= 1 && steps_per_epoch >= 1 && batch_size >= 1 && hidden >= 1,
          ErrorCode::InvalidArgument, "planner config values must be positive");
  require(warmup_epochs >= 0 && warmup_epochs <= epochs, ErrorCode::InvalidArgument,
          "warmup_epochs must lie in [0, epochs]");
  require(peak_lr > 0.0, ErrorCode::InvalidArgument, "peak_lr must be > 0");
  require(decay_every >= 0 && decay_factor > 0.0 && decay_factor <= 1.0, ErrorCode::InvalidArgument,
          "invalid learning-rate decay");
}

double learning_rate(int epoch, const PlannerConfig& config) {
  if (epoch < config.warmup_epochs) {
    return config.peak_lr * static_cast<double>(epoch + 1) / static_cast<double>(config.warmup_epochs);
  }
  if (config.decay_every > 0 && epoch >= config.decay_start_epoch) {
    const int drops = (epoch - config.decay_start_epoch) / config.decay_every + 1;
    return config.peak_lr * std::pow(config.decay_factor, drops);
  }
  return config.peak_lr;
}

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = standard_normal(rng);
  }
  return m;
}

}  // namespace

Planner train_planner(const std::vector<PlannerSample>& samples, int num_actions, const PlannerConfig& config,
                      PlannerTrainReport* report) {
  config.validate();
  require(!samples.empty(), ErrorCode::InvalidArgument, "no planner samples");
  const int horizon = static_cast<int>(samples.front().action_ids.size());
  const int embed_dim = static_cast<int>(samples.front().start_embedding.size());

  std::vector<ConditioningMatrix> clean;
  clean.reserve(samples.size());
  for (const auto& s : samples) {
    require(static_cast<int>(s.action_ids.size()) == horizon, ErrorCode::InvalidArgument,
            "planner samples must share one horizon");
    clean.push_back(build_x0(s.action_ids, s.start_embedding, s.goal_embedding, num_actions));
    require(clean.back().embed_block.rows() == embed_dim, ErrorCode::InvalidArgument,
            "planner samples must share one embedding dimension");
  }

  Planner planner{Denoiser(DenoiserShape{num_actions, horizon, embed_dim, config.hidden, 32},
                           derive_seed(config.seed, "denoiser-init")),
                  linear_schedule(config.diffusion_steps, config.beta_first, config.beta_last)};
  Adam optimizer(AdamConfig{.weight_decay = config.weight_decay});
  Rng rng = make_rng(config.seed, "planner-train");

  std::vector<DenoiserExample> batch(static_cast<std::size_t>(config.batch_size));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = learning_rate(epoch, config);
    std::vector<double> losses;
    for (int s = 0; s < config.steps_per_epoch; ++s) {
      for (auto& ex : batch) {
        const auto& x0 = clean[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(clean.size()) - 1))];
        ex.step = uniform_int(rng, 1, config.diffusion_steps);
        const Eigen::MatrixXd eps = gaussian_matrix(x0.action_block.rows(), x0.action_block.cols(), rng);
        ex.noised = forward_noise(x0, ex.step, eps, planner.schedule);
        ex.target = x0.action_block;
      }
      ParameterSet grads = planner.denoiser.params.zeros_like();
      const double loss = denoiser_gradients(planner.denoiser, batch, &grads);
      if (!std::isfinite(loss) || !grads.all_finite()) {
        std::ostringstream msg;
        msg << "planner training diverged at epoch " << epoch << " step " << s << " (loss " << loss << ")";
        fail(ErrorCode::Numeric, msg.str());
      }
      optimizer.step(planner.denoiser.params, grads, lr);
      losses.push_back(loss);
    }
    if (report) {
      report->epoch_loss.push_back(pairwise_mean(losses));
      report->epoch_lr.push_back(lr);
    }
  }
  return planner;
}

ConditioningMatrix reverse_process(ConditioningMatrix xn, int from, const NoiseSchedule& schedule,
                                   const X0Predictor& predictor, std::uint64_t seed,
                                   const TrajectoryObserver& observer) {
  require(from >= 1 && from <= schedule.steps(), ErrorCode::InvalidArgument, "reverse process start out of range");
  Rng rng(seed);
  if (observer) observer(from, xn);
  for (int n = from; n >= 1; --n) {
    const Eigen::MatrixXd x0_hat = predictor(xn, n);
    Eigen::MatrixXd mean = schedule.posterior_coef_x0(n) * x0_hat + schedule.posterior_coef_xn(n) * xn.action_block;
    if (n > 1) {
      const double sd = std::sqrt(schedule.posterior_variance(n));
      mean += sd * gaussian_matrix(mean.rows(), mean.cols(), rng);
    }
    xn.action_block = std::move(mean);
    if (observer) observer(n - 1, xn);
  }
  return xn;
}

std::vector<int> sample_plan(const Planner& planner, const Eigen::VectorXd& start_embedding,
                             const Eigen::VectorXd& goal_embedding, std::uint64_t seed,
                             const TrajectoryObserver& observer) {
  const auto& shape = planner.denoiser.shape();
  require(start_embedding.size() == shape.embed_dim && goal_embedding.size() == shape.embed_dim,
          ErrorCode::InvalidArgument, "conditioning embeddings do not match the planner's embedding dimension");
  Rng rng = make_rng(seed, "plan-init");
  ConditioningMatrix x;
  x.action_block = gaussian_matrix(shape.num_actions, shape.horizon, rng);
  x.embed_block = Eigen::MatrixXd::Zero(shape.embed_dim, shape.horizon);
  x.embed_block.col(0) = start_embedding;
  x.embed_block.col(shape.horizon - 1) = goal_embedding;
  const auto predictor = [&](const ConditioningMatrix& xn, int n) { return planner.denoiser.forward(xn, n); };
  const auto x0 = reverse_process(std::move(x), planner.schedule.steps(), planner.schedule, predictor,
                                  derive_seed(seed, "plan-reverse"), observer);
  return decode_actions(x0.action_block);
}

Checkpoint to_checkpoint(const Planner& planner) {
  Checkpoint c;
  c.params = planner.denoiser.params;
  const auto& s = planner.denoiser.shape();
  c.meta["kind"] = "planner";
  c.meta["num_actions"] = std::to_string(s.num_actions);
  c.meta["horizon"] = std::to_string(s.horizon);
  c.meta["embed_dim"] = std::to_string(s.embed_dim);
  c.meta["hidden"] = std::to_string(s.hidden);
  c.meta["step_dim"] = std::to_string(s.step_dim);
  std::ostringstream betas;
  betas.precision(17);
  for (std::size_t i = 0; i < planner.schedule.betas().size(); ++i) {
    betas << (i ? " " : "") << planner.schedule.betas()[i];
  }
  c.meta["betas"] = betas.str();
  return c;
}

Planner planner_from_checkpoint(const Checkpoint& checkpoint) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = checkpoint.meta.find(key);
    require(it != checkpoint.meta.end(), ErrorCode::Parse, "planner checkpoint lacks meta " + key);
    return it->second;
  };
  require(get("kind") == "planner", ErrorCode::Parse, "checkpoint is not a planner");
  DenoiserShape shape{std::stoi(get("num_actions")), std::stoi(get("horizon")), std::stoi(get("embed_dim")),
                      std::stoi(get("hidden")), std::stoi(get("step_dim"))};
  Planner planner{Denoiser(shape, 0), {}};
  for (auto& t : planner.denoiser.params.tensors()) {
    const auto& src = checkpoint.params.at(t.name);
    require(src.rows == t.rows && src.cols == t.cols, ErrorCode::Parse, "shape mismatch for " + t.name);
    t.data = src.data;
  }
  std::vector<double> betas;
  std::istringstream in(get("betas"));
  for (double b; in >> b;) betas.push_back(b);
  planner.schedule = NoiseSchedule(std::move(betas));
  return planner;
}

}  // namespace lap::diffusion
