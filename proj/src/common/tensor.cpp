#include "common/tensor.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace lap {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

int ParameterSet::add(const std::string& name, int rows, int cols) {
  for (const auto& t : tensors_) {
    require(t.name != name, ErrorCode::Duplicate, "duplicate tensor name: " + name);
  }
  tensors_.emplace_back(name, rows, cols);
  return static_cast<int>(tensors_.size()) - 1;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  fail(ErrorCode::InvalidArgument, "no tensor named " + name);
}

Tensor& ParameterSet::at(const std::string& name) {
  return const_cast<Tensor&>(static_cast<const ParameterSet&>(*this).at(name));
}

std::size_t ParameterSet::total_size() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (const auto& t : tensors_) out.add(t.name, t.rows, t.cols);
  return out;
}

void ParameterSet::set_zero() {
  for (auto& t : tensors_) std::fill(t.data.begin(), t.data.end(), 0.0);
}

bool ParameterSet::all_finite() const {
  for (const auto& t : tensors_) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

// Weight matrices get N(0, scale/fan_in); vectors (biases) start at zero.
void ParameterSet::fill_gaussian(std::uint64_t seed, double scale_numerator) {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    auto& t = tensors_[i];
    if (t.cols == 1) {
      std::fill(t.data.begin(), t.data.end(), 0.0);
      continue;
    }
    Rng rng = make_rng(seed, t.name, i);
    const double std_dev = std::sqrt(scale_numerator / static_cast<double>(t.cols));
    for (double& v : t.data) v = std_dev * standard_normal(rng);
  }
}

std::filesystem::path checkpoint_bin_path(const std::filesystem::path& stem) {
  return std::filesystem::path(stem.string() + ".bin");
}

std::filesystem::path checkpoint_manifest_path(const std::filesystem::path& stem) {
  return std::filesystem::path(stem.string() + ".manifest");
}

void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& checkpoint) {
  std::ofstream bin(checkpoint_bin_path(stem), std::ios::binary | std::ios::trunc);
  std::ofstream manifest(checkpoint_manifest_path(stem), std::ios::trunc);
  require(bin.good() && manifest.good(), ErrorCode::Io,
          "cannot open checkpoint for writing: " + stem.string());
  std::uint64_t offset = 0;
  for (const auto& t : checkpoint.params.tensors()) {
    manifest << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << ' ' << offset << '\n';
    const auto bytes = static_cast<std::streamsize>(t.data.size() * sizeof(double));
    bin.write(reinterpret_cast<const char*>(t.data.data()), bytes);
    offset += static_cast<std::uint64_t>(bytes);
  }
  for (const auto& [key, value] : checkpoint.meta) {
    manifest << "meta " << key << ' ' << value << '\n';
  }
  require(bin.good() && manifest.good(), ErrorCode::Io, "failed writing checkpoint " + stem.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& stem) {
  std::ifstream manifest(checkpoint_manifest_path(stem));
  std::ifstream bin(checkpoint_bin_path(stem), std::ios::binary);
  require(manifest.good() && bin.good(), ErrorCode::Io, "cannot open checkpoint " + stem.string());

  Checkpoint out;
  std::string line;
  int line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string kind;
    in >> kind;
    if (kind == "tensor") {
      std::string name;
      int rows = 0, cols = 0;
      std::uint64_t offset = 0;
      in >> name >> rows >> cols >> offset;
      require(!in.fail() && rows > 0 && cols > 0, ErrorCode::Parse,
              "bad tensor line " + std::to_string(line_no) + " in manifest");
      const int idx = out.params.add(name, rows, cols);
      auto& t = out.params[idx];
      bin.seekg(static_cast<std::streamoff>(offset));
      bin.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(double)));
      require(bin.good(), ErrorCode::Parse, "checkpoint data truncated for tensor " + name);
    } else if (kind == "meta") {
      std::string key, value;
      in >> key;
      std::getline(in >> std::ws, value);
      out.meta[key] = value;
    } else {
      fail(ErrorCode::Parse, "unknown manifest record '" + kind + "' at line " + std::to_string(line_no));
    }
  }
  return out;
}

}  // namespace lap
