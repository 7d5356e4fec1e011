#include "diffusion/denoiser.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/numeric.hpp"

namespace lap::diffusion {

Eigen::VectorXd step_embedding(int n, int dim) {
  Eigen::VectorXd e(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / std::max(1, half));
    e[i] = std::sin(n * freq);
    e[half + i] = std::cos(n * freq);
  }
  if (dim % 2) e[dim - 1] = 0.0;
  return e;
}

Denoiser::Denoiser(const DenoiserShape& shape, std::uint64_t seed) : shape_(shape) {
  require(shape.num_actions >= 1 && shape.horizon >= 2 && shape.embed_dim >= 1 && shape.hidden >= 1 &&
              shape.step_dim >= 2,
          ErrorCode::InvalidArgument, "invalid denoiser shape");
  params.add("den.w1", shape.hidden, shape.input_size());
  params.add("den.b1", shape.hidden, 1);
  params.add("den.w2", shape.hidden, shape.hidden);
  params.add("den.b2", shape.hidden, 1);
  params.add("den.w3", shape.output_size(), shape.hidden);
  params.add("den.b3", shape.output_size(), 1);
  params.fill_gaussian(seed, 2.0);
  params[kW3].mat() *= 0.5;
}

namespace {

Eigen::ArrayXXd silu(const Eigen::ArrayXXd& z) { return z / (1.0 + (-z).exp()); }

Eigen::ArrayXXd silu_grad(const Eigen::ArrayXXd& z) {
  const Eigen::ArrayXXd s = 1.0 / (1.0 + (-z).exp());
  return s * (1.0 + z * (1.0 - s));
}

void check_input(const DenoiserShape& shape, const ConditioningMatrix& x) {
  require(x.action_block.rows() == shape.num_actions && x.action_block.cols() == shape.horizon &&
              x.embed_block.rows() == shape.embed_dim && x.embed_block.cols() == shape.horizon,
          ErrorCode::InvalidArgument, "denoiser input shape mismatch");
  require(x.action_block.allFinite() && x.embed_block.allFinite(), ErrorCode::Numeric,
          "denoiser input contains non-finite values");
}

void fill_input_column(const DenoiserShape& shape, const ConditioningMatrix& x, int n,
                       Eigen::Ref<Eigen::VectorXd> col) {
  const Eigen::Index a = shape.num_actions * shape.horizon;
  const Eigen::Index e = shape.embed_dim * shape.horizon;
  col.head(a) = Eigen::Map<const Eigen::VectorXd>(x.action_block.data(), a);
  col.segment(a, e) = Eigen::Map<const Eigen::VectorXd>(x.embed_block.data(), e);
  col.tail(shape.step_dim) = step_embedding(n, shape.step_dim);
}

}  // namespace

Eigen::MatrixXd Denoiser::forward(const ConditioningMatrix& xn, int n) const {
  check_input(shape_, xn);
  Eigen::VectorXd in(shape_.input_size());
  fill_input_column(shape_, xn, n, in);
  const Eigen::ArrayXXd a1 = silu((params[kW1].mat() * in + params[kB1].vec()).array());
  const Eigen::ArrayXXd a2 = silu((params[kW2].mat() * a1.matrix() + params[kB2].vec()).array());
  const Eigen::VectorXd out = params[kW3].mat() * a2.matrix() + params[kB3].vec();
  return Eigen::Map<const Eigen::MatrixXd>(out.data(), shape_.num_actions, shape_.horizon);
}

double denoiser_gradients(const Denoiser& denoiser, std::span<const DenoiserExample> batch, ParameterSet* grads) {
  require(!batch.empty(), ErrorCode::InvalidArgument, "denoiser batch is empty");
  const auto& shape = denoiser.shape();
  const auto& p = denoiser.params;
  const auto b = static_cast<Eigen::Index>(batch.size());

  Eigen::MatrixXd in(shape.input_size(), b);
  Eigen::MatrixXd target(shape.output_size(), b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto& ex = batch[static_cast<std::size_t>(j)];
    check_input(shape, ex.noised);
    require(ex.target.rows() == shape.num_actions && ex.target.cols() == shape.horizon,
            ErrorCode::InvalidArgument, "denoiser target shape mismatch");
    fill_input_column(shape, ex.noised, ex.step, in.col(j));
    target.col(j) = Eigen::Map<const Eigen::VectorXd>(ex.target.data(), shape.output_size());
  }

  const Eigen::MatrixXd z1 = (p[Denoiser::kW1].mat() * in).colwise() + p[Denoiser::kB1].vec();
  const Eigen::MatrixXd a1 = silu(z1.array()).matrix();
  const Eigen::MatrixXd z2 = (p[Denoiser::kW2].mat() * a1).colwise() + p[Denoiser::kB2].vec();
  const Eigen::MatrixXd a2 = silu(z2.array()).matrix();
  const Eigen::MatrixXd out = (p[Denoiser::kW3].mat() * a2).colwise() + p[Denoiser::kB3].vec();
  const Eigen::MatrixXd diff = out - target;

  const double denom = static_cast<double>(b) * static_cast<double>(shape.output_size());
  std::vector<double> per_example(static_cast<std::size_t>(b));
  for (Eigen::Index j = 0; j < b; ++j) per_example[static_cast<std::size_t>(j)] = diff.col(j).squaredNorm();
  const double loss = pairwise_sum(per_example) / denom;
  require(std::isfinite(loss), ErrorCode::Numeric, "denoiser loss is not finite");
  if (!grads) return loss;

  auto& g = *grads;
  const Eigen::MatrixXd d_out = diff * (2.0 / denom);
  g[Denoiser::kW3].mat() += d_out * a2.transpose();
  g[Denoiser::kB3].vec() += d_out.rowwise().sum();
  const Eigen::MatrixXd d_z2 = ((p[Denoiser::kW3].mat().transpose() * d_out).array() * silu_grad(z2.array())).matrix();
  g[Denoiser::kW2].mat() += d_z2 * a1.transpose();
  g[Denoiser::kB2].vec() += d_z2.rowwise().sum();
  const Eigen::MatrixXd d_z1 = ((p[Denoiser::kW2].mat().transpose() * d_z2).array() * silu_grad(z1.array())).matrix();
  g[Denoiser::kW1].mat() += d_z1 * in.transpose();
  g[Denoiser::kB1].vec() += d_z1.rowwise().sum();
  return loss;
}

}  // namespace lap::diffusion
