// Brute-force reference implementations shared by the unit and acceptance
// tests. Written from the metric definitions, not from the library code.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "common/tensor.hpp"

namespace oracle {

using Plan = std::vector<int>;
using Tokens = std::vector<std::string>;

inline double success_rate(const std::vector<Plan>& p, const std::vector<Plan>& g) {
  int hits = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    bool same = p[i].size() == g[i].size();
    for (std::size_t t = 0; same && t < p[i].size(); ++t) same = p[i][t] == g[i][t];
    hits += same ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(p.size());
}

// Sum of per-plan fractions as exact rationals over a common denominator T.
inline double mean_accuracy(const std::vector<Plan>& p, const std::vector<Plan>& g) {
  long correct = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t t = 0; t < p[i].size(); ++t) correct += p[i][t] == g[i][t] ? 1 : 0;
  }
  const double T = static_cast<double>(p.front().size());
  return static_cast<double>(correct) / T / static_cast<double>(p.size());
}

inline double siou(const Plan& p, const Plan& g) {
  std::vector<int> ids;
  for (int a : p) ids.push_back(a);
  for (int a : g) ids.push_back(a);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  int inter = 0;
  for (int a : ids) {
    const bool in_p = std::find(p.begin(), p.end(), a) != p.end();
    const bool in_g = std::find(g.begin(), g.end(), a) != g.end();
    inter += in_p && in_g ? 1 : 0;
  }
  return static_cast<double>(inter) / static_cast<double>(ids.size());
}

inline std::vector<Tokens> ngrams(const Tokens& s, int n) {
  std::vector<Tokens> out;
  for (int i = 0; i + n <= static_cast<int>(s.size()); ++i) out.emplace_back(s.begin() + i, s.begin() + i + n);
  return out;
}

// Greedy matching of n-gram occurrences: each reference occurrence can be
// consumed once, which is the clipped multiset intersection.
inline int overlap(const Tokens& cand, const Tokens& ref, int n) {
  auto c = ngrams(cand, n);
  auto r = ngrams(ref, n);
  std::vector<bool> used(r.size(), false);
  int hits = 0;
  for (const auto& g : c) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!used[j] && r[j] == g) {
        used[j] = true;
        ++hits;
        break;
      }
    }
  }
  return hits;
}

enum class Variant { Precision, Recall, F1 };

inline double rouge(const Tokens& cand, const Tokens& ref, int n, Variant v) {
  const int o = overlap(cand, ref, n);
  const int c = std::max<int>(0, static_cast<int>(cand.size()) - n + 1);
  const int r = std::max<int>(0, static_cast<int>(ref.size()) - n + 1);
  if (c == 0 || r == 0) return 0.0;
  switch (v) {
    case Variant::Precision: return static_cast<double>(o) / c;
    case Variant::Recall: return static_cast<double>(o) / r;
    case Variant::F1: return o == 0 ? 0.0 : 2.0 * o / static_cast<double>(c + r);
  }
  return 0.0;
}

// Relative error of an analytic derivative against a central difference.
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

struct GradCheck {
  double worst = 0.0;
  int checked = 0;
};

// Checks `coords` random coordinates of every tensor of `params` using
// `loss()`; `grads` holds the analytic gradient.
inline GradCheck check_gradients(lap::ParameterSet& params, const lap::ParameterSet& grads,
                                 const std::function<double()>& loss, int coords, unsigned seed,
                                 double h = 1e-5) {
  std::mt19937 rng(seed);
  GradCheck out;
  for (int t = 0; t < params.count(); ++t) {
    auto& values = params[t].data;
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    for (int k = 0; k < coords; ++k) {
      const std::size_t i = pick(rng);
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss();
      values[i] = saved - h;
      const double down = loss();
      values[i] = saved;
      const double numeric = (up - down) / (2 * h);
      out.worst = std::max(out.worst, relative_error(grads[t].data[i], numeric));
      ++out.checked;
    }
  }
  return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lap_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::trunc) << text;
}

}  // namespace oracle
