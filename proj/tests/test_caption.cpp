#include <doctest.h>

#include <cmath>

#include "caption/discriminator.hpp"
#include "caption/model.hpp"
#include "caption/tokens.hpp"
#include "caption/trainer.hpp"
#include "common/error.hpp"
#include "oracles.hpp"

using namespace lap;
using namespace lap::caption;

namespace {

// Tokens: PAD BOS EOS UNK add coffee. Hidden unit k fires for input token k
// and the output layer maps it to the next token of "add coffee".
CaptionModel point_mass_model() {
  CaptionModel m(3, 6, 6, 1);
  m.params.set_zero();
  auto embed = m.params[CaptionModel::kEmbed].mat();
  for (int k = 0; k < 6; ++k) embed(k, k) = 10.0;
  auto out = m.params[CaptionModel::kOut].mat();
  out(4, TokenVocabulary::kBos) = 1000.0;
  out(5, 4) = 1000.0;
  out(TokenVocabulary::kEos, 5) = 1000.0;
  return m;
}

std::vector<TrainingExample> toy_examples(int per_class, int feature_dim, std::uint64_t seed) {
  // Three "tasks", each with a caption and a feature direction.
  const std::vector<std::vector<int>> captions = {{4, 5}, {6, 7, 5}, {8, 4}};
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<TrainingExample> out;
  for (int i = 0; i < per_class; ++i) {
    for (int c = 0; c < 3; ++c) {
      Eigen::VectorXd obs = Eigen::VectorXd::Zero(feature_dim);
      obs[c] = 1.0;
      for (Eigen::Index d = 0; d < obs.size(); ++d) obs[d] += noise(rng);
      out.push_back({obs, captions[static_cast<std::size_t>(c)]});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("token vocabulary reserves specials and sorts words") {
  TokenVocabulary v({{"pour", "coffee"}, {"add", "coffee"}});
  CHECK(v.size() == 7);
  CHECK(v.word(TokenVocabulary::kBos) != v.word(TokenVocabulary::kEos));
  CHECK(v.id("add") == 4);
  CHECK(v.id("coffee") == 5);
  CHECK(v.id("pour") == 6);
  CHECK(v.id("tea") == TokenVocabulary::kUnk);
  CHECK(v.decode({4, 5, TokenVocabulary::kEos, 6}) == core::Tokens{"add", "coffee"});
  CHECK(v.encode({"pour", "tea"}) == std::vector<int>{6, TokenVocabulary::kUnk});
}

TEST_CASE("schedule ratio examples") {
  SamplingSchedule s{0.8, 0.1, 1000};
  CHECK(schedule_ratio(0, s) == doctest::Approx(0.8));
  CHECK(schedule_ratio(1000, s) == doctest::Approx(0.1));
  CHECK(schedule_ratio(500, s) == doctest::Approx(0.45));
  CHECK(schedule_ratio(5000, s) == doctest::Approx(0.1));
}

TEST_CASE("schedule ratio is linear and non-increasing") {
  SamplingSchedule s{0.8, 0.1, 998};
  for (long a = 0; a <= 998; a += 17) {
    for (long b = a; b <= 998; b += 31) {
      if ((a + b) % 2 != 0) continue;
      CHECK(std::abs(schedule_ratio(a, s) + schedule_ratio(b, s) - 2 * schedule_ratio((a + b) / 2, s)) <= 1e-12);
      CHECK(schedule_ratio(a, s) >= schedule_ratio(b, s));
    }
  }
  CHECK_THROWS_AS((SamplingSchedule{0.1, 0.8, 10}.validate()), Error);
  CHECK_THROWS_AS((SamplingSchedule{0.8, 0.1, 0}.validate()), Error);
}

TEST_CASE("point mass model has zero nll on its caption") {
  const auto m = point_mass_model();
  const Eigen::VectorXd obs = Eigen::VectorXd::Zero(3);
  const auto tf = forward_generate(m, obs, GenerationMode::TeacherForced, std::vector<int>{4, 5}, 1);
  CHECK(tf.nll == doctest::Approx(0.0).epsilon(1e-12));
  const auto draws = sample_descriptions(m, obs, 1, 9);
  REQUIRE(draws.size() == 1);
  CHECK(draws[0].tokens == std::vector<int>{4, 5, TokenVocabulary::kEos});
  CHECK(draws[0].nll == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("uniform model scores ln of the vocabulary size") {
  CaptionModel m(4, 32, 8, 2);
  m.params[CaptionModel::kOut].vec().setZero();
  m.params[CaptionModel::kOutBias].vec().setZero();
  const Eigen::VectorXd obs = Eigen::VectorXd::Ones(4);
  for (auto mode : {GenerationMode::TeacherForced, GenerationMode::FreeRun}) {
    const auto g = forward_generate(m, obs, mode, std::vector<int>{4, 9, 17}, 3);
    CHECK(g.nll == doctest::Approx(std::log(32.0)).epsilon(1e-12));
  }
  CHECK(std::log(32.0) == doctest::Approx(3.466).epsilon(1e-3));
}

TEST_CASE("teacher forcing needs ground truth") {
  CaptionModel m(4, 10, 8, 2);
  CHECK_THROWS_AS(forward_generate(m, Eigen::VectorXd::Zero(4), GenerationMode::TeacherForced, std::nullopt, 1),
                  Error);
}

TEST_CASE("free running is deterministic per seed") {
  CaptionModel m(4, 12, 8, 5);
  const Eigen::VectorXd obs = Eigen::VectorXd::LinSpaced(4, -1, 1);
  const auto a = forward_generate(m, obs, GenerationMode::FreeRun, std::nullopt, 42);
  const auto b = forward_generate(m, obs, GenerationMode::FreeRun, std::nullopt, 42);
  CHECK(a.tokens == b.tokens);
  CHECK(a.nll == b.nll);
  CHECK(a.nll >= 0.0);
  CHECK((a.tokens.back() == TokenVocabulary::kEos || a.tokens.size() == 32));

  const auto first = sample_descriptions(m, obs, 20, 7);
  const auto second = sample_descriptions(m, obs, 20, 7);
  REQUIRE(first.size() == 20);
  bool varied = false;
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(first[i].tokens == second[i].tokens);
    CHECK(first[i].nll == second[i].nll);
    CHECK(first[i].mode == GenerationMode::FreeRun);
    varied = varied || first[i].tokens != first[0].tokens;
  }
  CHECK(varied);
}

TEST_CASE("discriminator loss closed forms") {
  Discriminator d(6, 3, 4, 4, 1);
  d.params.set_zero();
  std::vector<GeneratedCaption> caps(4);
  for (std::size_t i = 0; i < caps.size(); ++i) caps[i].tokens = {4, 5, static_cast<int>(i % 2) + 4};
  const std::vector<Eigen::VectorXd> obs(4, Eigen::VectorXd::Ones(3));
  CHECK(discriminator_loss(d, caps, obs, std::vector<int>{1, 0, 1, 0}, nullptr) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(discriminator_loss(d, caps, obs, std::vector<int>{1, 1, 1, 1}, nullptr) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  Adam adam;
  CHECK_THROWS_AS(discriminator_step(d, adam, 1e-3, {}, {}, {}), Error);
}

TEST_CASE("a separating discriminator has near zero loss") {
  // One hidden unit reads the share of token 4; captions either all 4 or all 5.
  Discriminator d(6, 2, 1, 1, 1);
  d.params.set_zero();
  d.params[Discriminator::kTokenEmbed].mat()(0, 4) = 1.0;
  d.params[Discriminator::kHidden].mat()(0, 0) = 10.0;
  d.params[Discriminator::kHiddenBias].data[0] = -5.0;
  d.params[Discriminator::kOut].data[0] = 20.0;
  std::vector<GeneratedCaption> caps(2);
  caps[0].tokens = {4, 4};
  caps[1].tokens = {5, 5};
  const std::vector<Eigen::VectorXd> obs(2, Eigen::VectorXd::Zero(2));
  CHECK(std::abs(d.logit(pool_tokens(caps[0].tokens, 6), obs[0])) > 19.9);
  CHECK(discriminator_loss(d, caps, obs, std::vector<int>{1, 0}, nullptr) < 1e-6);
}

TEST_CASE("discriminator step lowers its loss") {
  Discriminator d(6, 2, 4, 8, 3);
  std::vector<GeneratedCaption> caps(8);
  std::vector<Eigen::VectorXd> obs;
  std::vector<int> labels;
  for (int i = 0; i < 8; ++i) {
    caps[static_cast<std::size_t>(i)].tokens = i % 2 ? std::vector<int>{4, 4, 2} : std::vector<int>{5, 2};
    obs.push_back(Eigen::VectorXd::Zero(2));
    labels.push_back(i % 2);
  }
  Adam adam;
  const double before = discriminator_loss(d, caps, obs, labels, nullptr);
  for (int i = 0; i < 50; ++i) discriminator_step(d, adam, 1e-2, caps, obs, labels);
  CHECK(discriminator_loss(d, caps, obs, labels, nullptr) < before);
}

TEST_CASE("captioner gradients match finite differences") {
  CaptionModel model(5, 9, 7, 11);
  Discriminator disc(9, 5, 4, 6, 12);
  Rng rng(4);
  std::vector<CaptionItem> items;
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd obs = Eigen::VectorXd::LinSpaced(5, -0.5 + i, 0.5);
    const std::vector<int> gt = {4 + i, 6, 8};
    items.push_back(make_item(model, obs, gt, i == 1 ? GenerationMode::FreeRun : GenerationMode::TeacherForced, rng));
  }

  SUBCASE("token cross-entropy") {
    auto grads = model.params.zeros_like();
    captioner_loss(model, &disc, items, 0.0, AdversarialPath::StraightThrough, &grads);
    const auto r = oracle::check_gradients(model.params, grads, [&] {
      return captioner_loss(model, &disc, items, 0.0, AdversarialPath::StraightThrough, nullptr).total;
    }, 10, 1);
    CHECK(r.checked == 60);
    CHECK(r.worst < 1e-4);
  }
  SUBCASE("adversarial term through the relaxed path") {
    auto grads = model.params.zeros_like();
    const auto parts = captioner_loss(model, &disc, items, 1.0, AdversarialPath::Relaxed, &grads);
    CHECK(parts.adversarial > 0.0);
    // Remove the L_c part so only the adversarial gradient is checked.
    auto ce_grads = model.params.zeros_like();
    captioner_loss(model, &disc, items, 0.0, AdversarialPath::Relaxed, &ce_grads);
    auto adv_grads = grads;
    for (int t = 0; t < adv_grads.count(); ++t) adv_grads[t].vec() -= ce_grads[t].vec();
    const auto adv = oracle::check_gradients(model.params, adv_grads, [&] {
      return captioner_loss(model, &disc, items, 1.0, AdversarialPath::Relaxed, nullptr).adversarial;
    }, 10, 2);
    CHECK(adv.worst < 1e-4);
  }
  SUBCASE("discriminator parameters") {
    std::vector<GeneratedCaption> caps;
    std::vector<Eigen::VectorXd> obs;
    for (const auto& item : items) {
      caps.push_back({item.generated, 0.0, item.mode});
      obs.push_back(item.obs);
    }
    const std::vector<int> labels = {1, 0, 1};
    auto grads = disc.params.zeros_like();
    discriminator_loss(disc, caps, obs, labels, &grads);
    const auto r = oracle::check_gradients(disc.params, grads, [&] {
      return discriminator_loss(disc, caps, obs, labels, nullptr);
    }, 10, 3);
    CHECK(r.worst < 1e-4);
  }
}

TEST_CASE("straight-through gradient equals the relaxed one when draws are one-hot") {
  // With a point-mass model the softmax is one-hot, so both paths agree.
  auto model = point_mass_model();
  Discriminator disc(6, 3, 4, 4, 5);
  Rng rng(1);
  std::vector<CaptionItem> items = {make_item(model, Eigen::VectorXd::Zero(3), std::vector<int>{4, 5},
                                              GenerationMode::FreeRun, rng)};
  auto st = model.params.zeros_like();
  auto rel = model.params.zeros_like();
  const auto a = captioner_loss(model, &disc, items, 0.1, AdversarialPath::StraightThrough, &st);
  const auto b = captioner_loss(model, &disc, items, 0.1, AdversarialPath::Relaxed, &rel);
  CHECK(a.adversarial == doctest::Approx(b.adversarial).epsilon(1e-9));
  for (int t = 0; t < st.count(); ++t) CHECK((st[t].vec() - rel[t].vec()).norm() < 1e-9);
}

TEST_CASE("discriminator is updated every second iteration") {
  const auto examples = toy_examples(30, 4, 1);  // 90 examples
  CaptionModel model(4, 9, 16, 1);
  Discriminator disc(9, 4, 8, 8, 2);
  ProfessorForcingConfig config;
  config.epochs = 1;
  config.batch_size = 9;
  const auto report = train_professor_forcing(model, disc, examples, config);
  CHECK(report.iterations == 10);
  CHECK(report.disc_updates == 5);
  CHECK(report.teacher_iterations + report.free_run_iterations == 10);

  config.batch_size = 13;  // 7 iterations
  const auto odd = train_professor_forcing(model, disc, examples, config);
  CHECK(odd.iterations == 7);
  CHECK(odd.disc_updates == 3);
}

TEST_CASE("ratio one never free runs") {
  const auto examples = toy_examples(3, 4, 2);  // 9 examples, one batch
  CaptionModel model(4, 9, 4, 1);
  Discriminator disc(9, 4, 4, 4, 2);
  ProfessorForcingConfig config;
  config.epochs = 1000;
  config.batch_size = 9;
  config.ratio_start = 1.0;
  config.ratio_end = 1.0;
  const auto report = train_professor_forcing(model, disc, examples, config);
  CHECK(report.iterations == 1000);
  CHECK(report.free_run_iterations == 0);
  CHECK(report.teacher_iterations == 1000);
}

TEST_CASE("training lowers token cross-entropy and teacher forcing scores best") {
  const auto examples = toy_examples(20, 4, 3);
  CaptionModel model(4, 9, 32, 4);
  Discriminator disc(9, 4, 8, 8, 5);
  ProfessorForcingConfig config;
  config.epochs = 40;
  config.w = 0.0;
  config.seed = 6;
  const auto report = train_professor_forcing(model, disc, examples, config);
  CHECK(report.final_token_ce < report.initial_token_ce);
  CHECK(report.final_token_ce == doctest::Approx(teacher_forced_loss(model, examples)));
  CHECK(model.params.all_finite());

  double tf = 0.0, fr = 0.0;
  for (int i = 0; i < 210; ++i) {
    const auto& ex = examples[static_cast<std::size_t>(i) % examples.size()];
    tf += forward_generate(model, ex.obs, GenerationMode::TeacherForced, ex.tokens, static_cast<std::uint64_t>(i)).nll;
    fr += forward_generate(model, ex.obs, GenerationMode::FreeRun, ex.tokens, static_cast<std::uint64_t>(i)).nll;
  }
  CHECK(tf / 210 <= fr / 210);
}

TEST_CASE("professor forcing with w > 0 also trains") {
  const auto examples = toy_examples(20, 4, 3);
  CaptionModel model(4, 9, 32, 4);
  Discriminator disc(9, 4, 8, 8, 5);
  ProfessorForcingConfig config;
  config.epochs = 20;
  const auto report = train_professor_forcing(model, disc, examples, config);
  CHECK(report.final_token_ce < report.initial_token_ce);
  CHECK(report.epoch_adversarial.size() == 20);
  for (double a : report.epoch_adversarial) CHECK(std::isfinite(a));
}

TEST_CASE("captioner checkpoints round trip") {
  CaptionModel model(4, 7, 6, 8);
  Discriminator disc(7, 4, 3, 3, 9);
  TokenVocabulary tokens({{"add", "coffee", "now"}});
  const auto dir = oracle::temp_dir("caption_ckpt");
  save_checkpoint(dir / "cap", to_checkpoint(model, tokens, &disc));
  const auto loaded = load_checkpoint(dir / "cap");
  const auto back = caption_model_from_checkpoint(loaded);
  CHECK(back.hidden() == 6);
  for (int t = 0; t < model.params.count(); ++t) CHECK(back.params[t].data == model.params[t].data);
  CHECK(token_vocabulary_from_checkpoint(loaded).words() == tokens.words());
}
