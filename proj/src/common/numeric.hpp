#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace lap {

/// Pairwise (cascade) summation; the reduction order depends only on the
/// length, so results are reproducible regardless of how callers batch.
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline double pairwise_mean(std::span<const double> values) {
  return values.empty() ? 0.0 : pairwise_sum(values) / static_cast<double>(values.size());
}

/// log(sum(exp(v))) computed stably.
inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

inline Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Binary cross-entropy on a logit, stable for large |logit|.
inline double bce_with_logit(double logit, double label) {
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

}  // namespace lap
