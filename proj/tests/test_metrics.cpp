#include <doctest.h>

#include <numeric>

#include "common/error.hpp"
#include "metrics/metrics.hpp"
#include "oracles.hpp"

using namespace lap;
using namespace lap::metrics;
using core::tokenize;

namespace {

double sr1(const Plan& p, const Plan& g) { return success_rate(std::vector<Plan>{p}, std::vector<Plan>{g}); }
double acc1(const Plan& p, const Plan& g) { return mean_accuracy(std::vector<Plan>{p}, std::vector<Plan>{g}); }
double iou1(const Plan& p, const Plan& g) { return mean_siou(std::vector<Plan>{p}, std::vector<Plan>{g}); }

Plan random_plan(std::mt19937& rng, int T, int A) {
  std::uniform_int_distribution<int> pick(0, A - 1);
  Plan p(static_cast<std::size_t>(T));
  for (auto& a : p) a = pick(rng);
  return p;
}

}  // namespace

TEST_CASE("per-pair examples") {
  CHECK(sr1({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(sr1({1, 3, 2}, {1, 2, 3}) == 0.0);
  CHECK(acc1({1, 3, 2}, {1, 2, 3}) == doctest::Approx(1.0 / 3.0));
  CHECK(acc1({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(acc1({4, 5, 6}, {1, 2, 3}) == 0.0);
  CHECK(iou1({1, 2, 3}, {1, 2, 4}) == 0.5);
  CHECK(iou1({3, 1, 2}, {1, 2, 3}) == 1.0);
  CHECK(iou1({4, 5, 6}, {1, 2, 3}) == 0.0);
}

TEST_CASE("multiset accuracy ignores order") {
  const std::vector<Plan> p = {{1, 3, 2}}, g = {{1, 2, 3}};
  CHECK(mean_accuracy(p, g, AccuracyMode::Multiset) == 1.0);
  CHECK(mean_accuracy(std::vector<Plan>{{2, 2, 2}}, g, AccuracyMode::Multiset) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("mismatched inputs are rejected") {
  const std::vector<Plan> one = {{1, 2}}, two = {{1, 2}, {2, 3}}, wrong = {{1, 2, 3}};
  CHECK_THROWS_AS(success_rate(one, two), Error);
  CHECK_THROWS_AS(mean_accuracy(one, wrong), Error);
  CHECK_THROWS_AS(mean_siou({}, {}), Error);
}

TEST_CASE("metrics equal the brute-force oracle") {
  std::mt19937 rng(21);
  std::vector<Plan> preds, gts;
  for (int i = 0; i < 1000; ++i) {
    const int T = 2 + i % 5;
    preds.push_back(random_plan(rng, T, 5));
    gts.push_back(random_plan(rng, T, 5));
    CHECK(sr1(preds.back(), gts.back()) == oracle::success_rate({preds.back()}, {gts.back()}));
    CHECK(acc1(preds.back(), gts.back()) == oracle::mean_accuracy({preds.back()}, {gts.back()}));
    CHECK(iou1(preds.back(), gts.back()) == oracle::siou(preds.back(), gts.back()));
  }
  CHECK(success_rate(preds, gts) == oracle::success_rate(preds, gts));
  double iou_sum = 0.0, acc_sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    iou_sum += oracle::siou(preds[i], gts[i]);
    acc_sum += oracle::mean_accuracy({preds[i]}, {gts[i]});
  }
  CHECK(mean_siou(preds, gts) == doctest::Approx(iou_sum / 1000).epsilon(1e-13));
  CHECK(mean_accuracy(preds, gts) == doctest::Approx(acc_sum / 1000).epsilon(1e-13));
}

TEST_CASE("success rate is never above the other two") {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Plan> preds, gts;
    for (int i = 0; i < 20; ++i) {
      gts.push_back(random_plan(rng, 3, 4));
      preds.push_back(i % 3 == 0 ? gts.back() : random_plan(rng, 3, 4));
    }
    const double sr = success_rate(preds, gts);
    CHECK(sr <= mean_accuracy(preds, gts) + 1e-15);
    CHECK(sr <= mean_siou(preds, gts) + 1e-15);
  }
}

TEST_CASE("relabeling and permutation invariances") {
  std::mt19937 rng(8);
  std::vector<int> relabel(18);
  std::iota(relabel.begin(), relabel.end(), 0);
  std::shuffle(relabel.begin(), relabel.end(), rng);
  std::vector<Plan> preds, gts, preds_r, gts_r, preds_perm;
  for (int i = 0; i < 300; ++i) {
    preds.push_back(random_plan(rng, 4, 6));
    gts.push_back(i % 4 == 0 ? preds.back() : random_plan(rng, 4, 6));
    Plan pr, gr;
    for (int a : preds.back()) pr.push_back(relabel[static_cast<std::size_t>(a)]);
    for (int a : gts.back()) gr.push_back(relabel[static_cast<std::size_t>(a)]);
    preds_r.push_back(pr);
    gts_r.push_back(gr);
    Plan perm = preds.back();
    std::reverse(perm.begin(), perm.end());
    preds_perm.push_back(perm);
  }
  CHECK(mean_accuracy(preds_r, gts_r) == mean_accuracy(preds, gts));
  CHECK(mean_siou(preds_r, gts_r) == mean_siou(preds, gts));
  CHECK(mean_siou(preds_perm, gts) == mean_siou(preds, gts));

  // Reversing a correct non-palindromic plan breaks SR and mAcc but not mSIoU.
  const Plan gt = {1, 2, 3};
  const Plan rev = {3, 2, 1};
  CHECK(sr1(rev, gt) < sr1(gt, gt));
  CHECK(acc1(rev, gt) < acc1(gt, gt));
  CHECK(iou1(rev, gt) == iou1(gt, gt));
}

TEST_CASE("random plans hit the chance level") {
  std::mt19937 rng(33);
  const int n = 1000;
  std::vector<Plan> preds, gts;
  for (int i = 0; i < n; ++i) {
    preds.push_back(random_plan(rng, 3, 18));
    gts.push_back(random_plan(rng, 3, 18));
  }
  const double p = std::pow(1.0 / 18.0, 3);
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(success_rate(preds, gts) - p) <= 3 * sigma + 1.0 / n);
  const double pa = 1.0 / 18.0;
  CHECK(std::abs(mean_accuracy(preds, gts) - pa) <= 3 * std::sqrt(pa * (1 - pa) / (3.0 * n)));
}

TEST_CASE("report formatting") {
  EvalReport r;
  const std::vector<Plan> p = {{1, 2, 3}, {1, 3, 2}, {4, 5, 6}};
  const std::vector<Plan> g = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  r.horizons.push_back(evaluate(3, p, g));
  CHECK(r.horizons[0].samples == 3);
  const auto csv = to_csv(r);
  CHECK(csv == "horizon,SR,mAcc,mSIoU,n_samples\n3,33.33,44.44,66.67,3\n");
  CHECK(format_percent(0.5) == "50.00");
  CHECK(to_table(r).find("33.33") != std::string::npos);
}

TEST_CASE("rouge report") {
  using predict::ScoredCaption;
  const std::vector<core::Tokens> refs = {tokenize("a b c d"), tokenize("e f")};
  std::vector<std::vector<ScoredCaption>> same = {{{refs[0], 0.1}}, {{refs[1], 0.2}}};
  auto r = rouge_report(same, refs);
  CHECK(r.rouge1 == 1.0);
  CHECK(r.rouge2 == 1.0);

  std::vector<std::vector<ScoredCaption>> disjoint = {{{tokenize("x y"), 0.1}}, {{tokenize("z w"), 0.2}}};
  r = rouge_report(disjoint, refs);
  CHECK(r.rouge1 == 0.0);
  CHECK(r.rouge2 == 0.0);

  // Per-sample ROUGE-1 scores 1, 0.5, 0; the least-NLL caption is scored.
  const std::vector<core::Tokens> refs3 = {tokenize("a b"), tokenize("c d"), tokenize("e f")};
  std::vector<std::vector<ScoredCaption>> mixed = {
      {{tokenize("q q"), 0.9}, {tokenize("a b"), 0.1}},
      {{tokenize("c x"), 0.2}},
      {{tokenize("y z"), 0.3}},
  };
  r = rouge_report(mixed, refs3, predict::RougeVariant::Precision);
  CHECK(r.rouge1 == doctest::Approx(0.5));
  CHECK_THROWS_AS(rouge_report({}, {}), Error);
}
