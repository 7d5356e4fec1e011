#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "caption/discriminator.hpp"
#include "caption/model.hpp"

namespace lap::caption {

/// Linear teacher-forcing ratio schedule.
struct SamplingSchedule {
  double start_ratio = 0.8;
  double end_ratio = 0.1;
  long total_steps = 1;

  void validate() const;
};

/// start + (end - start) * step / total; steps past the end clamp to end.
double schedule_ratio(long step, const SamplingSchedule& schedule);

struct ProfessorForcingConfig {
  int epochs = 30;
  int batch_size = 9;
  double lr = 5e-3;
  double disc_lr = 1e-3;
  double w = 0.1;
  double ratio_start = 0.8;
  double ratio_end = 0.1;
  /// Teacher forcing iff p_t < ratio (true) or iff p_t > ratio (false).
  bool teacher_when_below = true;
  double grad_clip = 5.0;
  double weight_decay = 0.0;  // decoupled, captioner only
  std::uint64_t seed = 0;
};

struct TrainingExample {
  Eigen::VectorXd obs;
  std::vector<int> tokens;  // ground truth, without BOS/EOS
};

struct ProfessorForcingReport {
  std::vector<double> epoch_token_ce;  // mean L_c per epoch
  std::vector<double> epoch_adversarial;
  double last_disc_loss = 0.0;
  long iterations = 0;
  long disc_updates = 0;
  long teacher_iterations = 0;
  long free_run_iterations = 0;
  double initial_token_ce = 0.0;  // L_c of the untrained model on the whole set
  double final_token_ce = 0.0;    // L_c after training, same set and mode
};

/// Per iteration: draw p_t ~ U[0,1); pick teacher forcing or free running by
/// comparing with the scheduled ratio; update the captioner on
/// L_c + w * L_A. Every second iteration the discriminator takes one step on
/// the batch generated both ways.
ProfessorForcingReport train_professor_forcing(CaptionModel& model, Discriminator& disc,
                                               const std::vector<TrainingExample>& samples,
                                               const ProfessorForcingConfig& config);

/// Teacher-forced L_c of `model` on `samples`.
double teacher_forced_loss(const CaptionModel& model, const std::vector<TrainingExample>& samples);

}  // namespace lap::caption
