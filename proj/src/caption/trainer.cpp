#include "caption/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "common/error.hpp"
#include "common/numeric.hpp"
#include "common/optim.hpp"

namespace lap::caption {

void SamplingSchedule::validate() const {
  require(total_steps > 0, ErrorCode::InvalidArgument, "schedule total_steps must be > 0");
  require(0.0 <= end_ratio && end_ratio <= start_ratio && start_ratio <= 1.0, ErrorCode::InvalidArgument,
          "schedule requires 0 <= end_ratio <= start_ratio <= 1");
}

double schedule_ratio(long step, const SamplingSchedule& schedule) {
  schedule.validate();
  require(step >= 0, ErrorCode::InvalidArgument, "schedule step must be >= 0");
  if (step >= schedule.total_steps) return schedule.end_ratio;
  const double frac = static_cast<double>(step) / static_cast<double>(schedule.total_steps);
  return schedule.start_ratio + (schedule.end_ratio - schedule.start_ratio) * frac;
}

double teacher_forced_loss(const CaptionModel& model, const std::vector<TrainingExample>& samples) {
  require(!samples.empty(), ErrorCode::InvalidArgument, "no captioning samples");
  Rng rng(0);
  std::vector<CaptionItem> items;
  items.reserve(samples.size());
  for (const auto& s : samples) items.push_back(make_item(model, s.obs, s.tokens, GenerationMode::TeacherForced, rng));
  return captioner_loss(model, nullptr, items, 0.0, AdversarialPath::StraightThrough, nullptr).token_ce;
}

ProfessorForcingReport train_professor_forcing(CaptionModel& model, Discriminator& disc,
                                               const std::vector<TrainingExample>& samples,
                                               const ProfessorForcingConfig& config) {
  require(!samples.empty(), ErrorCode::InvalidArgument, "no captioning samples");
  require(config.epochs >= 1 && config.batch_size >= 1, ErrorCode::InvalidArgument,
          "epochs and batch_size must be >= 1");
  require(config.w >= 0.0, ErrorCode::InvalidArgument, "adversarial weight must be >= 0");

  const long batches_per_epoch =
      static_cast<long>((samples.size() + static_cast<std::size_t>(config.batch_size) - 1) /
                        static_cast<std::size_t>(config.batch_size));
  SamplingSchedule schedule{config.ratio_start, config.ratio_end, batches_per_epoch * config.epochs};
  schedule.validate();

  ProfessorForcingReport report;
  report.initial_token_ce = teacher_forced_loss(model, samples);

  Adam model_opt(AdamConfig{.weight_decay = config.weight_decay, .grad_clip = config.grad_clip});
  Adam disc_opt(AdamConfig{.grad_clip = config.grad_clip});
  Rng order_rng = make_rng(config.seed, "caption-order");
  Rng coin_rng = make_rng(config.seed, "caption-coin");
  Rng token_rng = make_rng(config.seed, "caption-tokens");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    std::vector<double> ce_terms, adv_terms;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      const double ratio = schedule_ratio(step, schedule);
      const double p_t = uniform01(coin_rng);
      const bool teacher = config.teacher_when_below ? p_t < ratio : p_t > ratio;
      const GenerationMode mode = teacher ? GenerationMode::TeacherForced : GenerationMode::FreeRun;
      (teacher ? report.teacher_iterations : report.free_run_iterations) += 1;

      std::vector<CaptionItem> items;
      for (std::size_t i = begin; i < end; ++i) {
        const auto& s = samples[order[i]];
        items.push_back(make_item(model, s.obs, s.tokens, mode, token_rng));
      }
      ParameterSet grads = model.params.zeros_like();
      const LossParts loss = captioner_loss(model, &disc, items, config.w, AdversarialPath::StraightThrough, &grads);
      if (!std::isfinite(loss.total) || !std::isfinite(global_norm(grads))) {
        std::ostringstream msg;
        msg << "captioner loss diverged at epoch " << epoch << " step " << step << ": L_c=" << loss.token_ce
            << " L_A=" << loss.adversarial << " mode=" << to_string(mode);
        fail(ErrorCode::Numeric, msg.str());
      }
      model_opt.step(model.params, grads, config.lr);
      ce_terms.push_back(loss.token_ce);
      adv_terms.push_back(loss.adversarial);

      if ((step + 1) % 2 == 0) {
        std::vector<GeneratedCaption> captions;
        std::vector<Eigen::VectorXd> obs;
        std::vector<int> labels;
        for (std::size_t i = begin; i < end; ++i) {
          const auto& s = samples[order[i]];
          for (GenerationMode m : {GenerationMode::TeacherForced, GenerationMode::FreeRun}) {
            const CaptionItem item = make_item(model, s.obs, s.tokens, m, token_rng);
            captions.push_back(GeneratedCaption{item.generated, 0.0, m});
            obs.push_back(s.obs);
            labels.push_back(m == GenerationMode::TeacherForced ? 1 : 0);
          }
        }
        report.last_disc_loss = discriminator_step(disc, disc_opt, config.disc_lr, captions, obs, labels);
        ++report.disc_updates;
      }
      ++step;
    }
    report.epoch_token_ce.push_back(pairwise_mean(ce_terms));
    report.epoch_adversarial.push_back(pairwise_mean(adv_terms));
  }
  report.iterations = step;
  report.final_token_ce = teacher_forced_loss(model, samples);
  return report;
}

}  // namespace lap::caption
