#include "common/optim.hpp"

#include <cmath>

#include "common/error.hpp"

namespace lap {

double global_norm(const ParameterSet& grads) {
  double s = 0.0;
  for (const auto& t : grads.tensors()) s += t.vec().squaredNorm();
  return std::sqrt(s);
}

void Adam::step(ParameterSet& params, const ParameterSet& grads, double lr) {
  require(params.count() == grads.count(), ErrorCode::Internal, "gradient/parameter count mismatch");
  if (m_.count() == 0) {
    m_ = params.zeros_like();
    v_ = params.zeros_like();
  }
  ++t_;
  double scale = 1.0;
  if (config_.grad_clip > 0.0) {
    const double norm = global_norm(grads);
    if (norm > config_.grad_clip) scale = config_.grad_clip / norm;
  }
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (int i = 0; i < params.count(); ++i) {
    auto p = params[i].vec();
    const auto g = grads[i].vec();
    auto m = m_[i].vec();
    auto v = v_[i].vec();
    m = config_.beta1 * m + (1.0 - config_.beta1) * scale * g;
    v = config_.beta2 * v.array() + (1.0 - config_.beta2) * (scale * g).array().square();
    if (config_.weight_decay > 0.0) p *= (1.0 - lr * config_.weight_decay);
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config_.eps);
  }
}

}  // namespace lap
