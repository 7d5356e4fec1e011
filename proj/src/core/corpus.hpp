#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/vocabulary.hpp"

namespace lap::core {

struct Segment {
  int action_id = 0;
  double start = 0.0;  // seconds
  double end = 0.0;    // seconds, > start
};

/// One video. Feature bucket k covers [k, k+1) seconds, so the video lasts
/// `features.size()` seconds. captions[i] annotates segments[i].
struct AnnotatedVideo {
  std::string video_id;
  int task_id = 0;
  std::vector<Segment> segments;
  std::vector<Eigen::VectorXd> features;
  std::vector<Tokens> captions;

  double duration() const { return static_cast<double>(features.size()); }
};

/// Throws Validation if segments overlap, are unordered, reference unknown
/// actions or disagree with the caption/feature tracks.
void validate_video(const AnnotatedVideo& video, const ActionVocabulary& vocab, int feature_dim);

struct Corpus {
  ActionVocabulary vocab;
  std::vector<AnnotatedVideo> videos;
  int feature_dim = 0;
};

struct SyntheticCorpusConfig {
  int num_tasks = 5;
  int actions_per_task = 6;
  int num_actions = 18;  // vocabulary size; tasks share actions when smaller than num_tasks*actions_per_task
  int num_videos = 150;
  int min_segments = 3;  // horizon range: segments per video
  int max_segments = 6;
  int feature_dim = 32;
  double feature_noise_sigma = 0.5;
  double caption_noise_prob = 0.0;
  double min_segment_seconds = 4.0;
  double max_segment_seconds = 10.0;
  double max_gap_seconds = 2.0;
  std::vector<std::vector<int>> confusable_groups;
  std::optional<DescriptionSet> descriptions;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Labels used for the first ids of a synthetic vocabulary; further ids get
/// generated "verb noun" labels.
const std::vector<std::string>& builtin_action_labels();
std::string synthetic_action_label(int id);

/// Unit-norm cluster centre per action; members of a confusable group share
/// one centre.
std::vector<Eigen::VectorXd> cluster_centers(const SyntheticCorpusConfig& config);

/// Task orders for the synthetic vocabulary. Pure function of the config.
std::vector<std::vector<int>> synthetic_task_orders(const SyntheticCorpusConfig& config);

/// Labels and task orders of the synthetic vocabulary, without descriptions.
ActionVocabulary synthetic_vocabulary(const SyntheticCorpusConfig& config);

/// `count` disjoint groups of `size` actions such that no two members of a
/// group appear in a common task; lowest ids first. Throws Validation when no
/// such grouping exists.
std::vector<std::vector<int>> cross_task_groups(const ActionVocabulary& vocab, int count, int size);

/// Pure function of `config`: same config, same corpus.
Corpus generate_synthetic_corpus(const SyntheticCorpusConfig& config);

/// JSON lines, one video per line:
/// {"video_id", "task_id", "segments":[{"action_id","start","end"}], "features":[[..]], "captions":[[..]]}
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);
std::vector<AnnotatedVideo> load_videos(const std::filesystem::path& path, const ActionVocabulary& vocab);

/// Convenience: `<dir>/corpus.jsonl`, `<dir>/vocab.tsv`, `<dir>/tasks.tsv`.
void save_corpus_dir(const std::filesystem::path& dir, const Corpus& corpus);
Corpus load_corpus_dir(const std::filesystem::path& dir);

}  // namespace lap::core
