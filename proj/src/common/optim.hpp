#pragma once

#include "common/tensor.hpp"

namespace lap {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled (AdamW)
  double grad_clip = 0.0;     // global L2 norm, 0 disables
};

/// AdamW over a ParameterSet. Moment buffers are shaped on first use.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(ParameterSet& params, const ParameterSet& grads, double lr);
  long steps_taken() const { return t_; }

 private:
  AdamConfig config_;
  ParameterSet m_;
  ParameterSet v_;
  long t_ = 0;
};

double global_norm(const ParameterSet& grads);

}  // namespace lap
