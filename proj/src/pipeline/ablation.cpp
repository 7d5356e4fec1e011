#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "pipeline/pipeline.hpp"

#ifndef LAP_DATA_DIR
#define LAP_DATA_DIR "data"
#endif

namespace lap::pipeline {

namespace fs = std::filesystem;

namespace {

struct Arm {
  std::string variant;
  std::vector<std::pair<std::string, std::string>> overrides;
  bool reuse_captioner = false;  // same captioner settings as the previous arm
};

std::vector<Arm> arms_for(const std::string& name, const ConfigTree& base) {
  if (name == "vo_vs_text") {
    return {{"text", {{"experiment.conditioning", "text"}}},
            {"visual", {{"experiment.conditioning", "visual"}}}};
  }
  if (name == "threshold_sweep") {
    return {{"threshold_0.5", {{"predictor.threshold", "0.5"}}},
            {"threshold_0.9", {{"predictor.threshold", "0.9"}}, true}};
  }
  if (name == "unknown_vs_random") {
    return {{"unknown_zero", {{"predictor.unknown", "zero"}}},
            {"unknown_random", {{"predictor.unknown", "random"}}, true}};
  }
  if (name == "language_enhancement") {
    std::string enhanced = base.get<std::string>("corpus.descriptions");
    if (enhanced.empty()) enhanced = std::string(LAP_DATA_DIR) + "/niv_enhanced_descriptions.tsv";
    return {{"original", {{"corpus.descriptions", ""}}}, {"enhanced", {{"corpus.descriptions", enhanced}}}};
  }
  if (name == "teacher_vs_professor") {
    return {{"teacher_forcing", {{"captioner.ratio_start", "1"}, {"captioner.ratio_end", "1"}, {"captioner.w", "0"}}},
            {"professor_forcing", {}}};
  }
  fail(ErrorCode::InvalidArgument, "unknown ablation '" + name + "'");
}

}  // namespace

const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> names = {"vo_vs_text", "threshold_sweep", "unknown_vs_random",
                                                 "language_enhancement", "teacher_vs_professor"};
  return names;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "variant,horizon,SR,mAcc,mSIoU,n_samples\n";
  for (const auto& r : rows) {
    out << r.variant << ',' << r.result.horizon << ',' << metrics::format_percent(r.result.success_rate) << ','
        << metrics::format_percent(r.result.mean_accuracy) << ',' << metrics::format_percent(r.result.mean_siou) << ','
        << r.result.samples << '\n';
  }
  return out.str();
}

std::vector<AblationRow> run_ablation(const std::string& name, const ConfigTree& base) {
  const auto arms = arms_for(name, base);
  const ExperimentConfig base_config = parse_config(base);
  const fs::path root = base_config.output_dir;
  fs::create_directories(root / name);

  std::vector<AblationRow> rows;
  fs::path previous_captioner;
  for (const auto& arm : arms) {
    ConfigTree tree = base;
    for (const auto& [key, value] : arm.overrides) set_config_value(tree, key, value);
    set_config_value(tree, "experiment.output_dir", (root / name / arm.variant).string());
    if (arm.reuse_captioner && !previous_captioner.empty() && base_config.captioner_checkpoint.empty()) {
      set_config_value(tree, "captioner.checkpoint", previous_captioner.string());
    }
    const ExperimentConfig config = parse_config(tree);
    const auto result = run_pipeline(tree);
    previous_captioner = config.uses_captions() ? captioner_stem(config, Workspace{config.output_dir}) : fs::path{};
    for (const auto& h : result.report.horizons) rows.push_back({arm.variant, h});
  }

  const fs::path csv = root / ("ablation_" + name + ".csv");
  std::ofstream out(csv, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + csv.string());
  out << ablation_csv(rows);
  return rows;
}

}  // namespace lap::pipeline
