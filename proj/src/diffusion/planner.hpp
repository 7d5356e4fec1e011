#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "common/tensor.hpp"
#include "diffusion/denoiser.hpp"
#include "diffusion/schedule.hpp"

namespace lap::diffusion {

struct PlannerConfig {
  int diffusion_steps = 50;
  int epochs = 130;
  int steps_per_epoch = 50;
  int batch_size = 128;
  double peak_lr = 3e-4;
  int warmup_epochs = 90;
  /// Multiply the rate by decay_factor every decay_every epochs starting at
  /// decay_start_epoch. decay_every == 0 disables decay.
  int decay_every = 0;
  double decay_factor = 0.5;
  int decay_start_epoch = 0;
  int hidden = 256;
  double beta_first = 1e-4;
  double beta_last = 0.02;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Warmup: peak * (epoch + 1) / warmup_epochs for epoch < warmup_epochs.
double learning_rate(int epoch, const PlannerConfig& config);

struct PlannerSample {
  std::vector<int> action_ids;
  Eigen::VectorXd start_embedding;
  Eigen::VectorXd goal_embedding;
};

struct Planner {
  Denoiser denoiser;
  NoiseSchedule schedule;
};

struct PlannerTrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_lr;
};

/// Each step draws a batch, a step n ~ U{1..N} and noise per sample, and
/// takes an AdamW step on the x0 mean squared error of the action rows.
Planner train_planner(const std::vector<PlannerSample>& samples, int num_actions, const PlannerConfig& config,
                      PlannerTrainReport* report = nullptr);

using X0Predictor = std::function<Eigen::MatrixXd(const ConditioningMatrix& xn, int n)>;
using TrajectoryObserver = std::function<void(int n, const ConditioningMatrix& xn)>;

/// Ancestral sampling from step `from` down to 0 using the x0-parameterised
/// posterior q(x_{n-1} | x_n, x̂0). No noise is added on the final step.
/// The conditioning rows are carried through unchanged.
ConditioningMatrix reverse_process(ConditioningMatrix xn, int from, const NoiseSchedule& schedule,
                                   const X0Predictor& predictor, std::uint64_t seed,
                                   const TrajectoryObserver& observer = {});

/// Starts from pure noise in the action rows and conditioning rows
/// [E_s, 0, ..., 0, E_g]; returns the argmax action per column.
std::vector<int> sample_plan(const Planner& planner, const Eigen::VectorXd& start_embedding,
                             const Eigen::VectorXd& goal_embedding, std::uint64_t seed,
                             const TrajectoryObserver& observer = {});

Checkpoint to_checkpoint(const Planner& planner);
Planner planner_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace lap::diffusion
