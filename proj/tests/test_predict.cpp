#include <doctest.h>

#include <map>

#include "common/error.hpp"
#include "core/corpus.hpp"
#include "predict/embedding.hpp"
#include "predict/predictor.hpp"
#include "predict/rouge.hpp"
#include "oracles.hpp"

using namespace lap;
using namespace lap::predict;
using core::tokenize;

namespace {

oracle::Variant to_oracle(RougeVariant v) {
  switch (v) {
    case RougeVariant::Precision: return oracle::Variant::Precision;
    case RougeVariant::Recall: return oracle::Variant::Recall;
    case RougeVariant::F1: return oracle::Variant::F1;
  }
  return oracle::Variant::F1;
}

core::Tokens random_tokens(std::mt19937& rng, int max_len) {
  static const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  std::uniform_int_distribution<int> len(0, max_len), word(0, 4);
  core::Tokens out(static_cast<std::size_t>(len(rng)));
  for (auto& w : out) w = words[static_cast<std::size_t>(word(rng))];
  return out;
}

std::vector<ScoredCaption> captions_of(const std::vector<std::string>& texts) {
  std::vector<ScoredCaption> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({tokenize(texts[i]), static_cast<double>(i)});
  return out;
}

const std::vector<Candidate> kCandidates = {
    {1, tokenize("grind beans fine")},
    {2, tokenize("pour hot water over grounds slowly")},
    {3, tokenize("add coffee")},
};

}  // namespace

TEST_CASE("rouge-1 examples") {
  const auto ref = tokenize("add coffee");
  for (auto v : {RougeVariant::Precision, RougeVariant::Recall, RougeVariant::F1}) {
    CHECK(rouge1(ref, ref, v) == 1.0);
    CHECK(rouge1(tokenize("jack car"), ref, v) == 0.0);
    CHECK(rouge1({}, ref, v) == 0.0);
  }
  const auto cand = tokenize("add coffee to filter");
  CHECK(rouge1(cand, ref, RougeVariant::Precision) == doctest::Approx(0.5));
  CHECK(rouge1(cand, ref, RougeVariant::Recall) == doctest::Approx(1.0));
  CHECK(rouge1(cand, ref, RougeVariant::F1) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(rouge1(cand, {}, RougeVariant::Precision), Error);
}

TEST_CASE("rouge-2 examples") {
  const auto abc = tokenize("a b c");
  CHECK(rouge2(abc, abc, RougeVariant::F1) == 1.0);
  CHECK(rouge2(abc, tokenize("b c d"), RougeVariant::Recall) == doctest::Approx(0.5));
  CHECK(ngram_overlap(abc, tokenize("b c d"), 2) == 1);
  CHECK(rouge2(tokenize("a"), abc, RougeVariant::Precision) == 0.0);
}

TEST_CASE("clipped counts cap repeated tokens") {
  CHECK(ngram_overlap(tokenize("the the the"), tokenize("the cat"), 1) == 1);
  CHECK(rouge1(tokenize("the the the"), tokenize("the cat"), RougeVariant::Precision) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("rouge matches the brute-force oracle") {
  std::mt19937 rng(17);
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto cand = random_tokens(rng, 8);
    auto ref = random_tokens(rng, 8);
    if (ref.empty()) ref = {"a"};
    for (int n : {1, 2}) {
      CHECK(ngram_overlap(cand, ref, n) == oracle::overlap(cand, ref, n));
      for (auto v : {RougeVariant::Precision, RougeVariant::Recall, RougeVariant::F1}) {
        CHECK(rouge_n(cand, ref, n, v) == oracle::rouge(cand, ref, n, to_oracle(v)));
        ++compared;
      }
    }
  }
  CHECK(compared == 6000);
}

TEST_CASE("variant names parse") {
  CHECK(parse_rouge_variant("precision") == RougeVariant::Precision);
  CHECK(parse_rouge_variant("recall") == RougeVariant::Recall);
  CHECK(parse_rouge_variant("f1") == RougeVariant::F1);
  CHECK_THROWS_AS(parse_rouge_variant("bleu"), Error);
}

TEST_CASE("prediction examples") {
  SUBCASE("exact description") {
    const auto p = predict_action(captions_of({"jack the car", "add coffee"}), kCandidates);
    REQUIRE(p.action.has_value());
    CHECK(*p.action == 3);
    CHECK(p.best_score == 1.0);
    CHECK(p.matched_caption == 1);
  }
  SUBCASE("everything below threshold") {
    // Best pair: "grind" of 3 tokens, 1/3 < 0.5.
    const auto p = predict_action(captions_of({"grind the car", "remove wheel nut", "x y z"}), kCandidates);
    CHECK(p.is_unknown());
    CHECK(p.best_score < 0.5);
    CHECK(p.best_score <= 0.4);
  }
  SUBCASE("threshold is inclusive") {
    const auto p = predict_action(captions_of({"add milk"}), kCandidates, 0.5);
    REQUIRE(p.action.has_value());
    CHECK(*p.action == 3);
  }
}

TEST_CASE("ties go to the lowest action id then the lowest caption") {
  const std::vector<Candidate> cands = {{7, tokenize("cut board")}, {4, tokenize("cut paper")}};
  const auto p = predict_action(captions_of({"cut x", "cut y"}), cands, 0.5);
  REQUIRE(p.action.has_value());
  CHECK(*p.action == 4);
  CHECK(p.matched_caption == 0);
}

TEST_CASE("threshold extremes and monotonicity") {
  std::mt19937 rng(5);
  std::vector<Candidate> cands;
  for (int a = 0; a < 6; ++a) {
    auto d = random_tokens(rng, 5);
    d.push_back("w" + std::to_string(a));
    cands.push_back({a, d});
  }
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<ScoredCaption> caps;
    for (int m = 0; m < 4; ++m) {
      auto t = random_tokens(rng, 6);
      if (t.empty()) t = {"z"};
      caps.push_back({t, 0.0});
    }
    CHECK_FALSE(predict_action(caps, cands, 0.0).is_unknown());
    CHECK(predict_action(caps, cands, 1.0001).is_unknown());
    std::optional<int> previous;
    bool unknown_seen = false;
    for (double th : {0.0, 0.2, 0.34, 0.5, 0.67, 0.8, 1.0}) {
      const auto p = predict_action(caps, cands, th);
      if (p.action) {
        CHECK_FALSE(unknown_seen);
        if (previous) CHECK(*p.action == *previous);
        CHECK(p.best_score >= th);
        previous = p.action;
      } else {
        unknown_seen = true;
        CHECK(p.best_score < th);
      }
    }
  }
}

TEST_CASE("argmax pair wins over the first acceptable one") {
  // cap0 vs a1: 3 of 5 tokens = 0.6; cap1 vs a2: 9 of 10 tokens = 0.9.
  const std::vector<Candidate> wide = {{1, tokenize("a b c d e")}, {2, tokenize("f g h i j k l m n o")}};
  const auto caps = captions_of({"a b c x y", "f g h i j k l m n z"});
  CHECK(rouge1(caps[0].tokens, wide[0].description, RougeVariant::Precision) == doctest::Approx(0.6));
  CHECK(rouge1(caps[1].tokens, wide[1].description, RougeVariant::Precision) == doctest::Approx(0.9));
  const auto p = predict_action(caps, wide);
  REQUIRE(p.action.has_value());
  CHECK(*p.action == 2);
  CHECK(p.matched_caption == 1);
  CHECK(p.best_score == doctest::Approx(0.9));
}

TEST_CASE("candidate sets") {
  core::SyntheticCorpusConfig config;
  const auto vocab = core::synthetic_vocabulary(config);
  const auto task = task_candidates(vocab, 2);
  auto expected = vocab.task_actions(2);
  std::sort(expected.begin(), expected.end());
  REQUIRE(task.size() == expected.size());
  for (std::size_t i = 0; i < task.size(); ++i) CHECK(task[i].action_id == expected[i]);
  CHECK(all_candidates(vocab).size() == 18);
}

TEST_CASE("randomize_unknown") {
  Prediction known;
  known.action = 5;
  CHECK(randomize_unknown(known, 18, 1).action == 5);
  CHECK_FALSE(randomize_unknown(known, 18, 1).randomized);

  Prediction unknown;
  const auto a = randomize_unknown(unknown, 18, 99);
  const auto b = randomize_unknown(unknown, 18, 99);
  REQUIRE(a.action.has_value());
  CHECK(a.action == b.action);
  CHECK(a.randomized);

  std::vector<int> counts(18, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(*randomize_unknown(unknown, 18, static_cast<std::uint64_t>(i)).action)]++;
  const double p = 1.0 / 18.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - n * p) <= 3 * sigma);
}

TEST_CASE("action lookup embeddings") {
  core::SyntheticCorpusConfig config;
  auto vocab = core::synthetic_vocabulary(config);
  vocab = vocab.with_descriptions(core::load_descriptions(LAP_DATA_DIR "/niv_enhanced_descriptions.tsv", vocab));
  const auto provider = EmbeddingProvider::action_lookup(vocab, 32);
  CHECK(provider.kind() == EmbeddingKind::ActionLookup);
  CHECK(provider.table().cols() == 18);

  Prediction unknown;
  CHECK(embed_prediction(unknown, provider).size() == 32);
  CHECK(embed_prediction(unknown, provider).isZero(0.0));
  Prediction zero;
  zero.action = 0;
  CHECK((embed_prediction(zero, provider) - provider.table().col(0)).norm() == 0.0);

  double worst = -1.0;
  for (int i = 0; i < 18; ++i) {
    const Eigen::VectorXd a = provider.table().col(i);
    CHECK(a.dot(a) == doctest::Approx(1.0));
    for (int j = i + 1; j < 18; ++j) worst = std::max(worst, a.dot(provider.table().col(j)));
  }
  CHECK(worst < 1.0 - 1e-6);
}

TEST_CASE("hashed bag of words") {
  const auto a = hashed_bag_of_words(tokenize("add coffee"), 32);
  CHECK(a.size() == 32);
  CHECK(a.norm() == doctest::Approx(1.0));
  CHECK((a - hashed_bag_of_words(tokenize("coffee add"), 32)).norm() == 0.0);
  CHECK(hashed_bag_of_words({}, 32).isZero(0.0));
}

TEST_CASE("caption embeddings use the least nll caption") {
  const auto provider = EmbeddingProvider::caption_bag_of_words(32);
  std::vector<ScoredCaption> caps = {{tokenize("jack car"), 2.1}, {tokenize("add coffee"), 0.3}, {tokenize("put soil"), 1.7}};
  CHECK(least_nll_index(caps) == 1);
  CHECK((embed_caption(caps, provider) - hashed_bag_of_words(tokenize("add coffee"), 32)).norm() == 0.0);
  CHECK((embed_caption(caps, provider) - embed_caption(caps, provider)).norm() == 0.0);
  std::vector<ScoredCaption> empty = {{{}, 0.1}};
  CHECK(embed_caption(empty, provider).isZero(0.0));
  caps[2].nll = 0.3;
  CHECK(least_nll_index(caps) == 1);
}

TEST_CASE("visual embeddings") {
  const auto same = EmbeddingProvider::visual_passthrough(32);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(32, -1, 1);
  CHECK((embed_visual(x, same) - x).norm() == 0.0);
  const auto proj = EmbeddingProvider::visual_projection(32, 16, 3);
  CHECK(embed_visual(x, proj).size() == 16);
  CHECK(embed_visual(Eigen::VectorXd::Zero(32), proj).isZero(0.0));
  CHECK_THROWS_AS(embed_visual(Eigen::VectorXd::Zero(8), same), Error);
}

TEST_CASE("embedding tables round trip") {
  Eigen::MatrixXd table = Eigen::MatrixXd::Random(4, 3);
  const auto dir = oracle::temp_dir("embed_table");
  save_embedding_table(dir / "e.csv", table);
  const auto text = oracle::read_file(dir / "e.csv");
  CHECK(text.rfind("dim=4\n", 0) == 0);
  const auto back = load_embedding_table(dir / "e.csv");
  CHECK((back - table).cwiseAbs().maxCoeff() < 1e-12);
}
