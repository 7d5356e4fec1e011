#include "diffusion/schedule.hpp"

#include <cmath>

#include "common/error.hpp"

namespace lap::diffusion {

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  require(!betas_.empty(), ErrorCode::InvalidArgument, "noise schedule needs at least one step");
  alpha_bar_.assign(betas_.size() + 1, 1.0);
  for (std::size_t i = 0; i < betas_.size(); ++i) {
    require(betas_[i] > 0.0 && betas_[i] < 1.0, ErrorCode::InvalidArgument, "betas must lie in (0, 1)");
    require(i == 0 || betas_[i] >= betas_[i - 1], ErrorCode::InvalidArgument, "betas must be non-decreasing");
    alpha_bar_[i + 1] = alpha_bar_[i] * (1.0 - betas_[i]);
  }
}

double NoiseSchedule::beta(int n) const {
  require(n >= 1 && n <= steps(), ErrorCode::InvalidArgument,
          "diffusion step " + std::to_string(n) + " outside [1, " + std::to_string(steps()) + "]");
  return betas_[static_cast<std::size_t>(n - 1)];
}

double NoiseSchedule::alpha_bar(int n) const {
  require(n >= 0 && n <= steps(), ErrorCode::InvalidArgument,
          "diffusion step " + std::to_string(n) + " outside [0, " + std::to_string(steps()) + "]");
  return alpha_bar_[static_cast<std::size_t>(n)];
}

double NoiseSchedule::posterior_variance(int n) const {
  return (1.0 - alpha_bar(n - 1)) / (1.0 - alpha_bar(n)) * beta(n);
}

double NoiseSchedule::posterior_coef_x0(int n) const {
  return std::sqrt(alpha_bar(n - 1)) * beta(n) / (1.0 - alpha_bar(n));
}

double NoiseSchedule::posterior_coef_xn(int n) const {
  return std::sqrt(alpha(n)) * (1.0 - alpha_bar(n - 1)) / (1.0 - alpha_bar(n));
}

NoiseSchedule linear_schedule(int steps, double beta_first, double beta_last) {
  require(steps >= 1, ErrorCode::InvalidArgument, "need at least one diffusion step");
  require(0.0 < beta_first && beta_first <= beta_last && beta_last < 1.0, ErrorCode::InvalidArgument,
          "linear schedule requires 0 < beta_first <= beta_last < 1");
  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    betas[static_cast<std::size_t>(i)] = beta_first + (beta_last - beta_first) * frac;
  }
  return NoiseSchedule(std::move(betas));
}

ConditioningMatrix build_x0(const std::vector<int>& action_ids, const Eigen::VectorXd& start_embedding,
                            const Eigen::VectorXd& goal_embedding, int num_actions) {
  const auto horizon = static_cast<Eigen::Index>(action_ids.size());
  require(horizon >= 2, ErrorCode::InvalidArgument, "plans need a horizon of at least 2");
  require(start_embedding.size() == goal_embedding.size() && start_embedding.size() > 0,
          ErrorCode::InvalidArgument, "start and goal embeddings must share a positive dimension");
  ConditioningMatrix x;
  x.action_block = Eigen::MatrixXd::Zero(num_actions, horizon);
  for (Eigen::Index t = 0; t < horizon; ++t) {
    const int id = action_ids[static_cast<std::size_t>(t)];
    require(id >= 0 && id < num_actions, ErrorCode::InvalidArgument,
            "action id " + std::to_string(id) + " outside vocabulary of " + std::to_string(num_actions));
    x.action_block(id, t) = 1.0;
  }
  x.embed_block = Eigen::MatrixXd::Zero(start_embedding.size(), horizon);
  x.embed_block.col(0) = start_embedding;
  x.embed_block.col(horizon - 1) = goal_embedding;
  return x;
}

ConditioningMatrix forward_noise(const ConditioningMatrix& x0, int n, const Eigen::MatrixXd& eps,
                                 const NoiseSchedule& schedule) {
  require(eps.rows() == x0.action_block.rows() && eps.cols() == x0.action_block.cols(),
          ErrorCode::InvalidArgument, "noise shape does not match the action block");
  // n == 0 is the noise-free limit and returns x0 unchanged.
  const double ab = schedule.alpha_bar(n);
  ConditioningMatrix xn;
  xn.action_block = std::sqrt(ab) * x0.action_block + std::sqrt(1.0 - ab) * eps;
  xn.embed_block = x0.embed_block;
  return xn;
}

std::vector<int> decode_actions(const Eigen::MatrixXd& action_block) {
  std::vector<int> out;
  for (Eigen::Index t = 0; t < action_block.cols(); ++t) {
    Eigen::Index best = 0;
    action_block.col(t).maxCoeff(&best);
    out.push_back(static_cast<int>(best));
  }
  return out;
}

}  // namespace lap::diffusion
