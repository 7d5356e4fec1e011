#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "predict/predictor.hpp"

namespace lap::metrics {

using Plan = std::vector<int>;

/// Fraction of plans equal to the ground truth position by position.
double success_rate(std::span<const Plan> preds, std::span<const Plan> gts);

enum class AccuracyMode { Positional, Multiset };

/// Positional: mean over plans of |{t : pred[t] == gt[t]}| / T.
/// Multiset: mean over plans of the clipped multiset overlap / T (ignores order).
double mean_accuracy(std::span<const Plan> preds, std::span<const Plan> gts,
                     AccuracyMode mode = AccuracyMode::Positional);

/// Mean over plans of |P ∩ G| / |P ∪ G| on the action-id sets.
double mean_siou(std::span<const Plan> preds, std::span<const Plan> gts);

struct HorizonReport {
  int horizon = 0;
  double success_rate = 0.0;
  double mean_accuracy = 0.0;
  double mean_siou = 0.0;
  int samples = 0;
};

HorizonReport evaluate(int horizon, std::span<const Plan> preds, std::span<const Plan> gts);

struct EvalReport {
  std::vector<HorizonReport> horizons;
};

/// `horizon,SR,mAcc,mSIoU,n_samples` with percentages to two decimals.
std::string to_csv(const EvalReport& report);
/// Column-aligned version of the same rows.
std::string to_table(const EvalReport& report);
void write_csv(const std::filesystem::path& path, const EvalReport& report);

struct RougeSummary {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
};

/// Mean ROUGE-1/ROUGE-2 of the least-NLL caption of each sample against its
/// reference.
RougeSummary rouge_report(const std::vector<std::vector<predict::ScoredCaption>>& captions,
                          const std::vector<core::Tokens>& references,
                          predict::RougeVariant variant = predict::RougeVariant::F1);

std::string format_percent(double fraction);

}  // namespace lap::metrics
