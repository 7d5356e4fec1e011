// Command-line front end over the C interface.
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lap.h"

namespace {

struct Failure {
  lap_status status;
  std::string message;
};

void check(lap_status status, const std::string& context = {}) {
  if (status == LAP_OK) return;
  std::string msg = lap_last_error();
  if (!context.empty() && msg.rfind('[', 0) != 0) msg = "[" + context + "] " + msg;
  throw Failure{status, msg};
}

std::string fetch(lap_status (*fn)(const lap_report*, char*, size_t, size_t*), const lap_report* r) {
  size_t need = 0;
  check(fn(r, nullptr, 0, &need));
  std::string text(need, '\0');
  check(fn(r, text.data(), text.size(), &need));
  text.resize(need - 1);
  return text;
}

struct Options {
  std::string config_path;
  std::string out;
  std::string seed;
  std::vector<std::string> sets;
};

// --config, else <out>/config.ini when present, else defaults; then global
// overrides.
lap_config* resolve_config(const Options& o) {
  lap_config* cfg = nullptr;
  std::string from = o.config_path;
  if (from.empty() && !o.out.empty() && std::filesystem::exists(std::filesystem::path(o.out) / "config.ini")) {
    from = (std::filesystem::path(o.out) / "config.ini").string();
  }
  if (from.empty()) {
    check(lap_config_create(&cfg), "config");
  } else {
    check(lap_config_load(from.c_str(), &cfg), "config");
  }
  if (!o.out.empty()) check(lap_config_set(cfg, "experiment.output_dir", o.out.c_str()), "config");
  if (!o.seed.empty()) check(lap_config_set(cfg, "experiment.seed", o.seed.c_str()), "config");
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Failure{LAP_ERR_INVALID_ARGUMENT, "[config] --set expects key=value, got '" + kv + "'"};
    check(lap_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "config");
  }
  return cfg;
}

struct ConfigGuard {
  lap_config* cfg;
  ~ConfigGuard() { lap_config_destroy(cfg); }
};

void set_if(lap_config* cfg, const char* key, const std::string& value) {
  if (!value.empty()) check(lap_config_set(cfg, key, value.c_str()), "config");
}

void print_report(lap_report* report) {
  std::fputs(fetch(lap_report_table, report).c_str(), stdout);
  lap_report_destroy(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Language-aided procedure planning on synthetic instructional videos"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "Configuration file (sectioned key = value)");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", o.seed, "Experiment seed");
  app.add_option("--set", o.sets, "Override any key: section.key=value (repeatable)");
  app.set_version_flag("--version", std::string(lap_version()));

  std::string setting, horizons, videos, sigma, confusable, descriptions;
  auto* gen = app.add_subcommand("gen-data", "Generate (or import) the annotated corpus");
  gen->add_option("--videos", videos, "Number of synthetic videos");
  gen->add_option("--sigma", sigma, "Feature noise standard deviation");
  gen->add_option("--confusable", confusable, "Confusable groups, e.g. \"0,5;2,9\"");
  gen->add_option("--descriptions", descriptions, "Elaborated description file");

  auto* curate = app.add_subcommand("curate", "Cut start/goal windows and split train/test");
  curate->add_option("--setting", setting, "kepp or pdpp");
  curate->add_option("--horizons", horizons, "Comma-separated horizons");

  std::string cap_epochs, cap_lr, cap_w, ratio_start, ratio_end;
  auto* train_cap = app.add_subcommand("train-captioner", "Train the captioner with professor forcing");
  train_cap->add_option("--epochs", cap_epochs);
  train_cap->add_option("--lr", cap_lr);
  train_cap->add_option("--w", cap_w, "Adversarial weight");
  train_cap->add_option("--ratio-start", ratio_start);
  train_cap->add_option("--ratio-end", ratio_end);

  std::string num_captions;
  auto* caption = app.add_subcommand("caption", "Sample captions for every observation window");
  caption->add_option("--num-captions", num_captions);

  std::string threshold, variant, unknown;
  bool global_candidates = false;
  auto* predict = app.add_subcommand("predict-actions", "Match captions to action descriptions");
  predict->add_option("--threshold", threshold);
  predict->add_option("--variant", variant)->check(CLI::IsMember({"precision", "recall", "f1"}));
  predict->add_option("--unknown", unknown)->check(CLI::IsMember({"zero", "random"}));
  predict->add_flag("--global-candidates", global_candidates, "Score against every action, not only the task's");

  std::string steps, pl_epochs, peak_lr, warmup, pl_seed, conditioning;
  auto* train_pl = app.add_subcommand("train-planner", "Train the diffusion planner per horizon");
  train_pl->add_option("--steps", steps, "Diffusion steps");
  train_pl->add_option("--epochs", pl_epochs);
  train_pl->add_option("--peak-lr", peak_lr);
  train_pl->add_option("--warmup-epochs", warmup);
  train_pl->add_option("--seed", pl_seed, "Planner seed");
  train_pl->add_option("--conditioning", conditioning, "text, caption_text or visual");

  std::string checkpoint, horizon;
  auto* plan = app.add_subcommand("plan", "Sample plans for the test windows");
  plan->add_option("--checkpoint", checkpoint, "Planner checkpoint stem");
  plan->add_option("--horizon", horizon);

  auto* evaluate = app.add_subcommand("evaluate", "Score plans: SR, mAcc, mSIoU");

  std::string ablation;
  auto* ablate = app.add_subcommand("ablate", "Run a paired ablation");
  std::vector<std::string> names;
  for (size_t i = 0; i < lap_ablation_count(); ++i) names.emplace_back(lap_ablation_name(i));
  ablate->add_option("name", ablation)->required()->check(CLI::IsMember(names));

  auto* latent = app.add_subcommand("project-latent", "PCA of text embeddings and visual features");
  auto* run = app.add_subcommand("run", "Every stage in order");

  CLI11_PARSE(app, argc, argv);

  try {
    lap_config* cfg = resolve_config(o);
    ConfigGuard guard{cfg};
    auto stage = [&](lap_stage s) {
      check(lap_run_stage(cfg, s), lap_stage_name(s));
      std::printf("%s: ok\n", lap_stage_name(s));
    };

    if (gen->parsed()) {
      set_if(cfg, "corpus.num_videos", videos);
      set_if(cfg, "corpus.feature_noise_sigma", sigma);
      set_if(cfg, "corpus.confusable_groups", confusable);
      set_if(cfg, "corpus.descriptions", descriptions);
      stage(LAP_STAGE_GEN_DATA);
    } else if (curate->parsed()) {
      set_if(cfg, "experiment.setting", setting);
      set_if(cfg, "experiment.horizons", horizons);
      stage(LAP_STAGE_CURATE);
    } else if (train_cap->parsed()) {
      set_if(cfg, "captioner.epochs", cap_epochs);
      set_if(cfg, "captioner.lr", cap_lr);
      set_if(cfg, "captioner.w", cap_w);
      set_if(cfg, "captioner.ratio_start", ratio_start);
      set_if(cfg, "captioner.ratio_end", ratio_end);
      stage(LAP_STAGE_TRAIN_CAPTIONER);
    } else if (caption->parsed()) {
      set_if(cfg, "predictor.num_captions", num_captions);
      stage(LAP_STAGE_CAPTION);
    } else if (predict->parsed()) {
      set_if(cfg, "predictor.threshold", threshold);
      set_if(cfg, "predictor.variant", variant);
      set_if(cfg, "predictor.unknown", unknown);
      if (global_candidates) set_if(cfg, "predictor.global_candidates", "true");
      stage(LAP_STAGE_PREDICT_ACTIONS);
    } else if (train_pl->parsed()) {
      set_if(cfg, "planner.steps", steps);
      set_if(cfg, "planner.epochs", pl_epochs);
      set_if(cfg, "planner.peak_lr", peak_lr);
      set_if(cfg, "planner.warmup_epochs", warmup);
      set_if(cfg, "planner.seed", pl_seed);
      set_if(cfg, "experiment.conditioning", conditioning);
      stage(LAP_STAGE_TRAIN_PLANNER);
    } else if (plan->parsed()) {
      set_if(cfg, "planner.checkpoint", checkpoint);
      set_if(cfg, "experiment.horizons", horizon);
      stage(LAP_STAGE_PLAN);
    } else if (evaluate->parsed()) {
      lap_report* report = nullptr;
      check(lap_evaluate(cfg, &report), "evaluate");
      print_report(report);
    } else if (ablate->parsed()) {
      lap_report* report = nullptr;
      check(lap_run_ablation(cfg, ablation.c_str(), &report), "ablate " + ablation);
      print_report(report);
    } else if (latent->parsed()) {
      double text = 0, visual = 0;
      check(lap_project_latent(cfg, &text, &visual), "project-latent");
      std::printf("silhouette text %.4f visual %.4f\n", text, visual);
    } else if (run->parsed()) {
      lap_report* report = nullptr;
      check(lap_run_pipeline(cfg, &report), "run");
      print_report(report);
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "lap: error: %s (%s)\n", f.message.c_str(), lap_status_string(f.status));
    return static_cast<int>(f.status);
  }
  return 0;
}
