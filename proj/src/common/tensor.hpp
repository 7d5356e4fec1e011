#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lap {

using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

/// A named, column-major dense tensor of rank ≤ 2.
struct Tensor {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::string name_, int rows_, int cols_)
      : name(std::move(name_)), rows(rows_), cols(cols_),
        data(static_cast<std::size_t>(rows_) * cols_, 0.0) {}

  std::size_t size() const { return data.size(); }
  MatrixMap mat() { return MatrixMap(data.data(), rows, cols); }
  ConstMatrixMap mat() const { return ConstMatrixMap(data.data(), rows, cols); }
  Eigen::Map<Eigen::VectorXd> vec() { return {data.data(), static_cast<Eigen::Index>(data.size())}; }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {data.data(), static_cast<Eigen::Index>(data.size())};
  }
};

/// Ordered collection of tensors. Models keep their weights here so the
/// optimiser, gradient checks and checkpoint I/O can treat them uniformly.
class ParameterSet {
 public:
  int add(const std::string& name, int rows, int cols);

  Tensor& operator[](int index) { return tensors_[static_cast<std::size_t>(index)]; }
  const Tensor& operator[](int index) const { return tensors_[static_cast<std::size_t>(index)]; }
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);

  int count() const { return static_cast<int>(tensors_.size()); }
  std::size_t total_size() const;
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  /// Same names and shapes, all zeros.
  ParameterSet zeros_like() const;
  void set_zero();
  bool all_finite() const;
  void fill_gaussian(std::uint64_t seed, double scale_numerator = 1.0);

 private:
  std::vector<Tensor> tensors_;
};

/// Named-tensor checkpoint: `<stem>.bin` holds raw little-endian doubles;
/// `<stem>.manifest` lists `tensor <name> <rows> <cols> <byte offset>` lines
/// and free-form `meta <key> <value>` lines.
struct Checkpoint {
  ParameterSet params;
  std::map<std::string, std::string> meta;
};

void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& stem);

std::filesystem::path checkpoint_bin_path(const std::filesystem::path& stem);
std::filesystem::path checkpoint_manifest_path(const std::filesystem::path& stem);

}  // namespace lap
