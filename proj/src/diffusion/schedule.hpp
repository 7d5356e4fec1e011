#pragma once

#include <vector>

#include <Eigen/Dense>

namespace lap::diffusion {

/// DDPM coefficients for steps n = 1..N; index 0 of alpha_bar is the
/// noise-free state (alpha_bar(0) == 1).
class NoiseSchedule {
 public:
  NoiseSchedule() = default;
  explicit NoiseSchedule(std::vector<double> betas);

  int steps() const { return static_cast<int>(betas_.size()); }
  double beta(int n) const;
  double alpha(int n) const { return 1.0 - beta(n); }
  double alpha_bar(int n) const;
  /// Variance of q(x_{n-1} | x_n, x_0).
  double posterior_variance(int n) const;
  /// Coefficients of x_0 and x_n in the posterior mean.
  double posterior_coef_x0(int n) const;
  double posterior_coef_xn(int n) const;

  const std::vector<double>& betas() const { return betas_; }

 private:
  std::vector<double> betas_;
  std::vector<double> alpha_bar_;  // alpha_bar_[n] for n = 0..N
};

/// Linearly spaced betas from beta_first to beta_last.
NoiseSchedule linear_schedule(int steps, double beta_first = 1e-4, double beta_last = 0.02);

/// Planner input: action rows (|A| x T) above conditioning rows (d x T).
/// Only columns 0 and T-1 of the conditioning rows are non-zero.
struct ConditioningMatrix {
  Eigen::MatrixXd action_block;
  Eigen::MatrixXd embed_block;

  int horizon() const { return static_cast<int>(action_block.cols()); }
};

/// One-hot action columns; embedding columns [E_s, 0, ..., 0, E_g].
ConditioningMatrix build_x0(const std::vector<int>& action_ids, const Eigen::VectorXd& start_embedding,
                            const Eigen::VectorXd& goal_embedding, int num_actions);

/// Closed-form q(x_n | x_0) applied to the action rows only; the
/// conditioning rows are copied untouched.
ConditioningMatrix forward_noise(const ConditioningMatrix& x0, int n, const Eigen::MatrixXd& eps,
                                 const NoiseSchedule& schedule);

/// Column-wise argmax of the action rows.
std::vector<int> decode_actions(const Eigen::MatrixXd& action_block);

}  // namespace lap::diffusion
