#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "caption/trainer.hpp"
#include "core/corpus.hpp"
#include "metrics/metrics.hpp"
#include "pipeline/config.hpp"
#include "pipeline/records.hpp"
#include "predict/embedding.hpp"

namespace lap::pipeline {

/// Fixed file layout under the output directory.
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.ini"; }
  std::filesystem::path corpus_dir() const { return root / "corpus"; }
  std::filesystem::path split() const { return root / "split.tsv"; }
  std::filesystem::path horizon_dir(int horizon) const { return root / ("T" + std::to_string(horizon)); }
  std::filesystem::path train_samples(int horizon) const { return horizon_dir(horizon) / "train.jsonl"; }
  std::filesystem::path test_samples(int horizon) const { return horizon_dir(horizon) / "test.jsonl"; }
  std::filesystem::path captioner() const { return root / "captioner"; }
  std::filesystem::path captioner_log() const { return root / "captioner_log.csv"; }
  std::filesystem::path captions() const { return root / "captions.jsonl"; }
  std::filesystem::path predictions() const { return root / "predictions.jsonl"; }
  std::filesystem::path embedding_table() const { return root / "embeddings.csv"; }
  std::filesystem::path planner(int horizon) const { return horizon_dir(horizon) / "planner"; }
  std::filesystem::path planner_log(int horizon) const { return horizon_dir(horizon) / "planner_log.csv"; }
  std::filesystem::path plans(int horizon) const { return horizon_dir(horizon) / "plans.jsonl"; }
  std::filesystem::path report_csv() const { return root / "report.csv"; }
  std::filesystem::path report_txt() const { return root / "report.txt"; }
  std::filesystem::path rouge_csv() const { return root / "rouge.csv"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
};

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::filesystem::path> checkpoints;
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
};

/// Referenced paths must exist.
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// Runs `fn`, tagging any error with the stage name and recording the time.
template <typename Fn>
auto run_stage(const std::string& name, RunManifest* manifest, Fn&& fn) -> decltype(fn());

/// Synthetic corpus or the configured one, with the description file applied.
core::Corpus build_corpus(const ExperimentConfig& config);

/// Deterministic video-level split.
VideoSplit split_videos(const core::Corpus& corpus, double test_fraction, std::uint64_t seed);

/// Observation features of every segment and role of the given videos, paired
/// with the segment captions.
std::vector<caption::TrainingExample> captioner_examples(const core::Corpus& corpus,
                                                         const std::vector<std::string>& video_ids,
                                                         curation::WindowSetting setting,
                                                         const caption::TokenVocabulary& tokens);

/// Token table: every description word plus every caption word of the videos.
caption::TokenVocabulary captioner_tokens(const core::Corpus& corpus, const std::vector<std::string>& video_ids);

/// Seed for one endpoint, independent of the order endpoints are visited.
std::uint64_t endpoint_seed(std::uint64_t seed, const std::string& tag, const EndpointKey& key);

/// Start/goal conditioning vectors for a curated sample.
class EndpointEmbedder {
 public:
  EndpointEmbedder(const ExperimentConfig& config, const core::Corpus& corpus, const Workspace& workspace);

  int dim() const;
  std::pair<Eigen::VectorXd, Eigen::VectorXd> embed(const curation::CuratedSample& sample, bool training) const;
  const predict::EmbeddingProvider& provider() const { return provider_; }

 private:
  Eigen::VectorXd endpoint(const curation::CuratedSample& sample, const EndpointKey& key, int action,
                           const Eigen::VectorXd& features, bool training) const;

  const ExperimentConfig& config_;
  predict::EmbeddingProvider provider_;
  predict::EmbeddingProvider lookup_;
  CaptionTable captions_;
  PredictionTable predictions_;
};

// Stages. Each reads its inputs from the workspace and writes its outputs
// there, so any stage can be re-run on its own.
void stage_gen_data(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest);
void stage_curate(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest);
caption::ProfessorForcingReport stage_train_captioner(const ExperimentConfig& config, const Workspace& ws,
                                                      RunManifest* manifest);
void stage_caption(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest);
void stage_predict(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest);
void stage_train_planner(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest);
void stage_plan(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest);
metrics::EvalReport stage_evaluate(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest);

/// Captioner checkpoint stem in use: the configured one or the workspace's.
std::filesystem::path captioner_stem(const ExperimentConfig& config, const Workspace& ws);
/// Stem of the captioner trained without fold `fold` of the training videos.
std::filesystem::path fold_stem(const std::filesystem::path& stem, int fold);
/// Fold of a training video: its position in the split modulo `folds`.
std::map<std::string, int> fold_assignment(const VideoSplit& split, int folds);

struct PipelineResult {
  metrics::EvalReport report;
  RunManifest manifest;
};

/// All stages in order. Caption stages are skipped when no captions are
/// needed. Writes the rendered config and the manifest.
PipelineResult run_pipeline(const ConfigTree& tree);

/// Latent projections of start observations: text embeddings and visual
/// features of the first horizon's test samples. Returns the silhouette
/// scores (text, visual).
std::pair<double, double> project_latent_stage(const ExperimentConfig& config, const Workspace& ws);

struct AblationRow {
  std::string variant;
  metrics::HorizonReport result;
};

const std::vector<std::string>& ablation_names();

/// Paired variants of the base config with shared seeds. Each arm runs under
/// `<output_dir>/<name>/<variant>`; rows go to `<output_dir>/ablation_<name>.csv`.
std::vector<AblationRow> run_ablation(const std::string& name, const ConfigTree& base);

std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace lap::pipeline

#include "pipeline/stage.inl"
