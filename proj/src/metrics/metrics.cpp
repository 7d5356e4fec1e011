#include "metrics/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/numeric.hpp"
#include "predict/embedding.hpp"

namespace lap::metrics {

namespace {

void check_aligned(std::span<const Plan> preds, std::span<const Plan> gts) {
  require(preds.size() == gts.size(), ErrorCode::InvalidArgument,
          "prediction and ground-truth lists differ in length (" + std::to_string(preds.size()) + " vs " +
              std::to_string(gts.size()) + ")");
  require(!preds.empty(), ErrorCode::InvalidArgument, "no plans to evaluate");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require(preds[i].size() == gts[i].size() && !gts[i].empty(), ErrorCode::InvalidArgument,
            "plan " + std::to_string(i) + " has a horizon mismatch");
  }
}

template <typename F>
double mean_over(std::span<const Plan> preds, std::span<const Plan> gts, F per_pair) {
  check_aligned(preds, gts);
  std::vector<double> v(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) v[i] = per_pair(preds[i], gts[i]);
  return pairwise_mean(v);
}

}  // namespace

double success_rate(std::span<const Plan> preds, std::span<const Plan> gts) {
  return mean_over(preds, gts, [](const Plan& p, const Plan& g) { return p == g ? 1.0 : 0.0; });
}

double mean_accuracy(std::span<const Plan> preds, std::span<const Plan> gts, AccuracyMode mode) {
  return mean_over(preds, gts, [mode](const Plan& p, const Plan& g) {
    int hits = 0;
    if (mode == AccuracyMode::Positional) {
      for (std::size_t t = 0; t < g.size(); ++t) hits += p[t] == g[t] ? 1 : 0;
    } else {
      std::map<int, int> counts;
      for (int a : g) ++counts[a];
      for (int a : p) {
        auto it = counts.find(a);
        if (it != counts.end() && it->second > 0) {
          --it->second;
          ++hits;
        }
      }
    }
    return static_cast<double>(hits) / static_cast<double>(g.size());
  });
}

double mean_siou(std::span<const Plan> preds, std::span<const Plan> gts) {
  return mean_over(preds, gts, [](const Plan& p, const Plan& g) {
    const std::set<int> ps(p.begin(), p.end());
    const std::set<int> gs(g.begin(), g.end());
    std::vector<int> inter, uni;
    std::set_intersection(ps.begin(), ps.end(), gs.begin(), gs.end(), std::back_inserter(inter));
    std::set_union(ps.begin(), ps.end(), gs.begin(), gs.end(), std::back_inserter(uni));
    return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
  });
}

HorizonReport evaluate(int horizon, std::span<const Plan> preds, std::span<const Plan> gts) {
  HorizonReport r;
  r.horizon = horizon;
  r.success_rate = success_rate(preds, gts);
  r.mean_accuracy = mean_accuracy(preds, gts);
  r.mean_siou = mean_siou(preds, gts);
  r.samples = static_cast<int>(preds.size());
  return r;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * fraction);
  return buf;
}

std::string to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "horizon,SR,mAcc,mSIoU,n_samples\n";
  for (const auto& h : report.horizons) {
    out << h.horizon << ',' << format_percent(h.success_rate) << ',' << format_percent(h.mean_accuracy) << ','
        << format_percent(h.mean_siou) << ',' << h.samples << '\n';
  }
  return out.str();
}

std::string to_table(const EvalReport& report) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-8s %8s %8s %8s %10s\n", "horizon", "SR", "mAcc", "mSIoU", "n_samples");
  out << line;
  for (const auto& h : report.horizons) {
    std::snprintf(line, sizeof(line), "%-8d %8s %8s %8s %10d\n", h.horizon, format_percent(h.success_rate).c_str(),
                  format_percent(h.mean_accuracy).c_str(), format_percent(h.mean_siou).c_str(), h.samples);
    out << line;
  }
  return out.str();
}

void write_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  out << to_csv(report);
}

RougeSummary rouge_report(const std::vector<std::vector<predict::ScoredCaption>>& captions,
                          const std::vector<core::Tokens>& references, predict::RougeVariant variant) {
  require(!captions.empty(), ErrorCode::InvalidArgument, "no captions to score");
  require(captions.size() == references.size(), ErrorCode::InvalidArgument,
          "captions and references differ in length");
  std::vector<double> r1, r2;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    const auto& best = captions[i][static_cast<std::size_t>(predict::least_nll_index(captions[i]))];
    r1.push_back(predict::rouge1(best.tokens, references[i], variant));
    r2.push_back(predict::rouge2(best.tokens, references[i], variant));
  }
  return {pairwise_mean(r1), pairwise_mean(r2)};
}

}  // namespace lap::metrics
