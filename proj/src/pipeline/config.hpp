#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "caption/trainer.hpp"
#include "core/corpus.hpp"
#include "curation/curation.hpp"
#include "diffusion/planner.hpp"
#include "predict/rouge.hpp"

namespace lap::pipeline {

/// Which representation of the start/goal observations conditions the planner.
///   TextLookup  - predicted action -> description embedding (LAP)
///   CaptionText - embedding of the least-NLL generated caption (LAP-Text)
///   Visual      - pooled observation features (LAP-vo)
enum class ConditioningMode { TextLookup, CaptionText, Visual };

ConditioningMode parse_conditioning_mode(std::string_view text);
const char* to_string(ConditioningMode mode);

enum class UnknownPolicy { Zero, Random };

/// Where ground-truth action embeddings replace the predicted ones.
///   None  - predicted everywhere
///   Train - planner trained on ground truth, evaluated on predictions
///   All   - ground truth for training and evaluation (captioner unused)
enum class OracleEmbeddings { None, Train, All };

OracleEmbeddings parse_oracle_embeddings(std::string_view text);
const char* to_string(OracleEmbeddings oracle);

UnknownPolicy parse_unknown_policy(std::string_view text);
const char* to_string(UnknownPolicy policy);

struct PredictorSettings {
  double threshold = 0.5;
  predict::RougeVariant variant = predict::RougeVariant::Precision;
  UnknownPolicy unknown = UnknownPolicy::Zero;
  bool global_candidates = false;
  int num_captions = 20;
  int embed_dim = 32;
  int max_caption_length = 24;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  curation::WindowSetting setting = curation::WindowSetting::KEPP;
  std::vector<int> horizons = {3};
  ConditioningMode conditioning = ConditioningMode::TextLookup;
  double test_fraction = 0.3;
  OracleEmbeddings oracle = OracleEmbeddings::None;

  std::filesystem::path corpus_path;        // load instead of generating when set
  std::filesystem::path descriptions_path;  // Enhanced description file, optional
  core::SyntheticCorpusConfig corpus;
  /// Confusable groups as written in the file: ids or labels.
  std::vector<std::vector<std::string>> confusable_labels;

  PredictorSettings predictor;
  caption::ProfessorForcingConfig captioner;
  int captioner_hidden = 64;
  /// Train-split endpoints are captioned by a captioner that did not see
  /// their video (k-fold over training videos); 1 disables.
  int captioner_folds = 5;
  std::filesystem::path captioner_checkpoint;  // reuse instead of training when set

  diffusion::PlannerConfig planner;
  std::filesystem::path planner_checkpoint;  // plan with this checkpoint (single horizon)
  std::filesystem::path output_dir = "out";

  void validate() const;
  /// Captioner training and captioning are needed.
  bool uses_captions() const {
    return conditioning != ConditioningMode::Visual && oracle != OracleEmbeddings::All;
  }
};

using ConfigTree = boost::property_tree::ptree;

/// Defaults mirror the NIV-scale settings.
ConfigTree default_config_tree();
ConfigTree read_config_tree(const std::filesystem::path& path);
void write_config_tree(const std::filesystem::path& path, const ConfigTree& tree);
/// `section.key`; unknown keys are rejected.
void set_config_value(ConfigTree& tree, const std::string& key, const std::string& value);

ExperimentConfig parse_config(const ConfigTree& tree);

/// Canonical `key = value` rendering (sorted sections and keys).
std::string render_config(const ConfigTree& tree);
std::uint64_t config_hash(const ConfigTree& tree);

}  // namespace lap::pipeline
