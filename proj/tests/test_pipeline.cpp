#include <doctest.h>

#include <set>

#include <json.hpp>

#include "common/error.hpp"
#include "pipeline/config.hpp"
#include "pipeline/latent.hpp"
#include "pipeline/pipeline.hpp"
#include "oracles.hpp"

using namespace lap;
using namespace lap::pipeline;
namespace fs = std::filesystem;

namespace {

ConfigTree tiny_config(const fs::path& out, const std::string& conditioning = "text") {
  auto tree = default_config_tree();
  const std::vector<std::pair<std::string, std::string>> values = {
      {"experiment.output_dir", out.string()},
      {"experiment.conditioning", conditioning},
      {"corpus.num_videos", "30"},
      {"captioner.epochs", "2"},
      {"captioner.folds", "2"},
      {"captioner.hidden", "16"},
      {"predictor.num_captions", "3"},
      {"planner.epochs", "2"},
      {"planner.steps_per_epoch", "4"},
      {"planner.batch_size", "16"},
      {"planner.warmup_epochs", "1"},
      {"planner.hidden", "32"},
      {"planner.steps", "10"},
  };
  for (const auto& [k, v] : values) set_config_value(tree, k, v);
  return tree;
}

std::vector<double> pairwise_distances(const Eigen::MatrixXd& coords) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < coords.rows(); ++j) out.push_back((coords.row(i) - coords.row(j)).norm());
  }
  return out;
}

}  // namespace

TEST_CASE("default config parses and validates") {
  const auto c = parse_config(default_config_tree());
  CHECK(c.seed == 1);
  CHECK(c.horizons == std::vector<int>{3});
  CHECK(c.conditioning == ConditioningMode::TextLookup);
  CHECK(c.predictor.threshold == 0.5);
  CHECK(c.predictor.variant == predict::RougeVariant::Precision);
  CHECK(c.captioner.w == doctest::Approx(0.1));
  CHECK(c.captioner.ratio_start == doctest::Approx(0.8));
  CHECK(c.captioner.ratio_end == doctest::Approx(0.1));
  CHECK(c.captioner_hidden == 64);
  CHECK(c.planner.diffusion_steps == 50);
  CHECK(c.planner.epochs == 130);
  CHECK(c.planner.steps_per_epoch == 50);
  CHECK(c.planner.peak_lr == doctest::Approx(3e-4));
  CHECK(c.planner.hidden == 256);
  CHECK(c.corpus.num_tasks == 5);
  CHECK(c.corpus.num_actions == 18);
  CHECK(c.uses_captions());
}

TEST_CASE("config values and errors") {
  auto tree = default_config_tree();
  set_config_value(tree, "experiment.horizons", "3,4,5,6");
  set_config_value(tree, "experiment.conditioning", "lap-vo");
  set_config_value(tree, "experiment.setting", "pdpp");
  auto c = parse_config(tree);
  CHECK(c.horizons == std::vector<int>{3, 4, 5, 6});
  CHECK(c.conditioning == ConditioningMode::Visual);
  CHECK(c.setting == curation::WindowSetting::PDPP);
  CHECK_FALSE(c.uses_captions());

  CHECK_THROWS_AS(set_config_value(tree, "experiment.nonsense", "1"), Error);
  auto bad = default_config_tree();
  set_config_value(bad, "experiment.horizons", "1");
  CHECK_THROWS_AS(parse_config(bad), Error);
  bad = default_config_tree();
  set_config_value(bad, "experiment.conditioning", "audio");
  CHECK_THROWS_AS(parse_config(bad), Error);
  bad = default_config_tree();
  set_config_value(bad, "experiment.test_fraction", "1.5");
  CHECK_THROWS_AS(parse_config(bad), Error);
  bad = default_config_tree();
  set_config_value(bad, "experiment.oracle_embeddings", "all");
  set_config_value(bad, "experiment.conditioning", "visual");
  CHECK_THROWS_AS(parse_config(bad), Error);
}

TEST_CASE("config files round trip and hash canonically") {
  const auto dir = oracle::temp_dir("config_rt");
  auto tree = default_config_tree();
  set_config_value(tree, "predictor.threshold", "0.9");
  write_config_tree(dir / "c.ini", tree);
  const auto back = read_config_tree(dir / "c.ini");
  CHECK(render_config(back) == render_config(tree));
  CHECK(config_hash(back) == config_hash(tree));
  CHECK(config_hash(back) != config_hash(default_config_tree()));
  CHECK(parse_config(back).predictor.threshold == doctest::Approx(0.9));

  oracle::write_file(dir / "partial.ini", "[planner]\nepochs = 100\n");
  CHECK(parse_config(read_config_tree(dir / "partial.ini")).planner.epochs == 100);
  oracle::write_file(dir / "unknown.ini", "[planner]\nwings = 2\n");
  CHECK_THROWS_AS(read_config_tree(dir / "unknown.ini"), Error);
}

TEST_CASE("confusable groups accept labels, ids and auto") {
  auto tree = default_config_tree();
  set_config_value(tree, "corpus.confusable_groups", "add coffee,even surface;4,9");
  auto c = parse_config(tree);
  REQUIRE(c.corpus.confusable_groups.size() == 2);
  CHECK(c.corpus.confusable_groups[0] == std::vector<int>{0, 17});
  CHECK(c.corpus.confusable_groups[1] == std::vector<int>{4, 9});

  set_config_value(tree, "corpus.confusable_groups", "auto");
  c = parse_config(tree);
  std::set<int> covered;
  for (const auto& g : c.corpus.confusable_groups) covered.insert(g.begin(), g.end());
  CHECK(covered.size() == 9);  // half the vocabulary
}

TEST_CASE("video split is deterministic and disjoint") {
  core::SyntheticCorpusConfig cc;
  cc.num_videos = 50;
  const auto corpus = core::generate_synthetic_corpus(cc);
  const auto a = split_videos(corpus, 0.3, 5);
  const auto b = split_videos(corpus, 0.3, 5);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.test.size() == 15);
  CHECK(a.train.size() == 35);
  std::set<std::string> all(a.train.begin(), a.train.end());
  for (const auto& id : a.test) CHECK(all.insert(id).second);
  CHECK(split_videos(corpus, 0.3, 6).test != a.test);

  const auto folds = fold_assignment(a, 5);
  CHECK(folds.size() == 35);
  for (const auto& [id, k] : folds) {
    CHECK(k >= 0);
    CHECK(k < 5);
  }
  CHECK(fold_stem("x/captioner", 2) == fs::path("x/captioner_fold2"));
}

TEST_CASE("endpoint seeds depend only on the key") {
  const EndpointKey k1{"v00001", 2, curation::WindowRole::Start};
  const EndpointKey k2{"v00001", 2, curation::WindowRole::Goal};
  CHECK(endpoint_seed(1, "caption", k1) == endpoint_seed(1, "caption", k1));
  CHECK(endpoint_seed(1, "caption", k1) != endpoint_seed(1, "caption", k2));
  CHECK(endpoint_seed(1, "caption", k1) != endpoint_seed(2, "caption", k1));
}

TEST_CASE("pca on planar centred data is lossless") {
  std::vector<Eigen::VectorXd> v;
  std::mt19937 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd plane(2, 2);
  for (int i = 0; i < 30; ++i) {
    Eigen::VectorXd x(2);
    x << n(rng), 0.3 * n(rng);
    v.push_back(x);
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  for (const auto& x : v) mean += x;
  mean /= 30.0;
  for (auto& x : v) x -= mean;
  const auto p = project_latent(v);
  REQUIRE(p.coords.rows() == 30);
  const auto before = pairwise_distances([&] {
    Eigen::MatrixXd m(30, 2);
    for (int i = 0; i < 30; ++i) m.row(i) = v[static_cast<std::size_t>(i)].transpose();
    return m;
  }());
  const auto after = pairwise_distances(p.coords);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(std::abs(before[i] - after[i]) < 1e-9);
  for (int c = 0; c < 2; ++c) {
    Eigen::Index arg;
    p.components.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(p.components(arg, c) > 0.0);
  }
  CHECK(p.variance[0] >= p.variance[1]);
}

TEST_CASE("pca of identical vectors collapses to the origin") {
  std::vector<Eigen::VectorXd> v(100, Eigen::VectorXd::LinSpaced(6, 1, 6));
  const auto p = project_latent(v);
  CHECK(p.coords.cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(project_latent({v[0], v[1]}), Error);
}

TEST_CASE("pca distances survive a global rotation") {
  std::mt19937 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Eigen::VectorXd> v;
  for (int i = 0; i < 40; ++i) {
    Eigen::VectorXd x(5);
    for (int d = 0; d < 5; ++d) x[d] = n(rng) * (5 - d);
    v.push_back(x);
  }
  Eigen::MatrixXd g(5, 5);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = n(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  std::vector<Eigen::VectorXd> rotated;
  for (const auto& x : v) rotated.push_back(q * x);
  const auto a = pairwise_distances(project_latent(v).coords);
  const auto b = pairwise_distances(project_latent(rotated).coords);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
}

TEST_CASE("silhouette prefers separated clusters") {
  std::mt19937 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  auto make = [&](double spread) {
    std::vector<Eigen::VectorXd> v;
    std::vector<int> labels;
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(8);
        x[c] = 4.0;
        for (int d = 0; d < 8; ++d) x[d] += spread * n(rng);
        v.push_back(x);
        labels.push_back(c);
      }
    }
    return silhouette_score(project_latent(v).coords, labels);
  };
  const double tight = make(0.1);
  const double loose = make(3.0);
  CHECK(tight > loose);
  CHECK(tight > 0.8);

  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 0, 1, 10, 0, 10, 1;
  // a = 1, b = sqrt(100) or sqrt(101); mean of (b - a) / b.
  const double b1 = 10.0, b2 = std::sqrt(101.0);
  const double expected = ((b1 + b2) / 2 - 1) / ((b1 + b2) / 2);
  CHECK(silhouette_score(pts, {0, 0, 1, 1}) == doctest::Approx(expected));
  CHECK(silhouette_score(pts, {0, 0, 0, 0}) == 0.0);
}

TEST_CASE("latent csv and svg outputs") {
  const auto dir = oracle::temp_dir("latent_out");
  Eigen::MatrixXd coords(2, 2);
  coords << 1.5, -2, 0.25, 3;
  write_latent_csv(dir / "l.csv", coords, {0, 1});
  CHECK(oracle::read_file(dir / "l.csv") == "x,y,label\n1.500000,-2.000000,0\n0.250000,3.000000,1\n");
  write_latent_svg(dir / "l.svg", {{"text", coords, {0, 1}}, {"visual", coords, {1, 1}}});
  const auto svg = oracle::read_file(dir / "l.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("visual") != std::string::npos);
}

TEST_CASE("ablation names") {
  const auto& names = ablation_names();
  for (const char* n : {"vo_vs_text", "threshold_sweep", "unknown_vs_random", "language_enhancement",
                        "teacher_vs_professor"}) {
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  }
  CHECK_THROWS_AS(run_ablation("nope", default_config_tree()), Error);
}

TEST_CASE("stage errors carry the stage name") {
  try {
    run_stage("plan", nullptr, [] { fail(ErrorCode::Io, "missing file"); });
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "[plan] missing file");
    CHECK(e.code() == ErrorCode::Io);
  }
}

TEST_CASE("tiny pipeline runs, is deterministic and stages rerun in isolation") {
  const auto dir = oracle::temp_dir("tiny_pipeline");
  const auto a = run_pipeline(tiny_config(dir / "a"));
  const auto b = run_pipeline(tiny_config(dir / "b"));
  REQUIRE(a.report.horizons.size() == 1);
  CHECK(a.report.horizons[0].samples > 0);
  for (const char* f : {"report.csv", "rouge.csv", "T3/plans.jsonl", "predictions.jsonl", "captions.jsonl"}) {
    CHECK(oracle::read_file(dir / "a" / f) == oracle::read_file(dir / "b" / f));
  }

  const auto manifest = nlohmann::json::parse(oracle::read_file(dir / "a" / "manifest.json"));
  CHECK(manifest.contains("config_hash"));
  bool has_captioner = false;
  for (const auto& c : manifest.at("checkpoints")) {
    has_captioner = has_captioner || c.get<std::string>().find("captioner") != std::string::npos;
  }
  CHECK(has_captioner);

  // Re-run plan and evaluate from the workspace alone.
  const Workspace ws{dir / "a"};
  const auto plans = oracle::read_file(ws.plans(3));
  const auto report = oracle::read_file(ws.report_csv());
  const auto config = parse_config(read_config_tree(ws.config()));
  fs::remove(ws.plans(3));
  stage_plan(config, ws, nullptr);
  stage_evaluate(config, ws, nullptr);
  CHECK(oracle::read_file(ws.plans(3)) == plans);
  CHECK(oracle::read_file(ws.report_csv()) == report);

  const auto sil = project_latent_stage(config, ws);
  CHECK(std::isfinite(sil.first));
  CHECK(fs::exists(dir / "a" / "latent.svg"));
}

TEST_CASE("visual pipeline skips the captioner") {
  const auto dir = oracle::temp_dir("tiny_visual");
  run_pipeline(tiny_config(dir, "visual"));
  CHECK_FALSE(fs::exists(Workspace{dir}.captions()));
  const auto manifest = nlohmann::json::parse(oracle::read_file(dir / "manifest.json"));
  for (const auto& c : manifest.at("checkpoints")) CHECK(c.get<std::string>().find("captioner") == std::string::npos);
  CHECK(fs::exists(dir / "report.csv"));
}
