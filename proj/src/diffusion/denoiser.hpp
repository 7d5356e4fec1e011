#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "common/tensor.hpp"
#include "diffusion/schedule.hpp"

namespace lap::diffusion {

struct DenoiserShape {
  int num_actions = 0;
  int horizon = 0;
  int embed_dim = 0;
  int hidden = 256;
  int step_dim = 32;

  int input_size() const { return (num_actions + embed_dim) * horizon + step_dim; }
  int output_size() const { return num_actions * horizon; }
};

/// Sinusoidal embedding of the diffusion step.
Eigen::VectorXd step_embedding(int n, int dim);

/// Two SiLU hidden layers over [vec(action rows); vec(conditioning rows);
/// step embedding], predicting the clean action rows x0.
class Denoiser {
 public:
  enum Tensor : int { kW1, kB1, kW2, kB2, kW3, kB3 };

  Denoiser() = default;
  Denoiser(const DenoiserShape& shape, std::uint64_t seed);

  const DenoiserShape& shape() const { return shape_; }

  /// x̂0 for a single noised matrix at step n.
  Eigen::MatrixXd forward(const ConditioningMatrix& xn, int n) const;

  ParameterSet params;

 private:
  DenoiserShape shape_;
};

struct DenoiserExample {
  ConditioningMatrix noised;
  int step = 1;
  Eigen::MatrixXd target;  // clean action rows
};

/// Mean over the batch of the mean squared error on the action rows.
/// Gradients of that value are written to `grads` when non-null.
double denoiser_gradients(const Denoiser& denoiser, std::span<const DenoiserExample> batch,
                          ParameterSet* grads);

}  // namespace lap::diffusion
