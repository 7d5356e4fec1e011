#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "caption/discriminator.hpp"
#include "caption/model.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "diffusion/planner.hpp"
#include "pipeline/latent.hpp"
#include "predict/rouge.hpp"

namespace lap::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  return out;
}

void add_artifact(RunManifest* manifest, const fs::path& path) {
  if (manifest) manifest->artifacts.push_back(path);
}

void add_checkpoint(RunManifest* manifest, const fs::path& stem) {
  if (!manifest) return;
  manifest->checkpoints.push_back(checkpoint_bin_path(stem));
  manifest->checkpoints.push_back(checkpoint_manifest_path(stem));
}

void require_file(const fs::path& path, const std::string& producer) {
  require(fs::exists(path), ErrorCode::Io, "missing " + path.string() + " (run " + producer + " first)");
}

const core::AnnotatedVideo& find_video(const core::Corpus& corpus, const std::string& id) {
  for (const auto& v : corpus.videos) {
    if (v.video_id == id) return v;
  }
  fail(ErrorCode::Validation, "unknown video '" + id + "'");
}

core::Corpus workspace_corpus(const Workspace& ws) {
  require_file(ws.corpus_dir() / "corpus.jsonl", "gen-data");
  return core::load_corpus_dir(ws.corpus_dir());
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void write_manifest(const fs::path& path, const RunManifest& manifest) {
  json j;
  j["config_hash"] = hex(manifest.config_hash);
  json seeds = json::object();
  for (const auto& [k, v] : manifest.seeds) seeds[k] = v;
  j["seeds"] = seeds;
  auto paths = [](const std::vector<fs::path>& list) {
    json arr = json::array();
    for (const auto& p : list) {
      require(fs::exists(p), ErrorCode::Internal, "manifest references missing path " + p.string());
      arr.push_back(p.string());
    }
    return arr;
  };
  j["checkpoints"] = paths(manifest.checkpoints);
  j["artifacts"] = paths(manifest.artifacts);
  json timings = json::array();
  for (const auto& [stage, seconds] : manifest.timings) timings.push_back({{"stage", stage}, {"seconds", seconds}});
  j["timings"] = timings;
  open_out(path) << j.dump(2) << '\n';
}

core::Corpus build_corpus(const ExperimentConfig& config) {
  if (!config.corpus_path.empty()) {
    core::Corpus corpus = core::load_corpus_dir(config.corpus_path);
    if (!config.descriptions_path.empty()) {
      corpus.vocab = corpus.vocab.with_descriptions(core::load_descriptions(config.descriptions_path, corpus.vocab));
    }
    return corpus;
  }
  core::SyntheticCorpusConfig k = config.corpus;
  if (!config.descriptions_path.empty()) {
    k.descriptions = core::load_descriptions(config.descriptions_path, core::synthetic_vocabulary(k));
  }
  return core::generate_synthetic_corpus(k);
}

VideoSplit split_videos(const core::Corpus& corpus, double test_fraction, std::uint64_t seed) {
  const int n = static_cast<int>(corpus.videos.size());
  require(n >= 2, ErrorCode::Validation, "need at least 2 videos to split");
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng = make_rng(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);
  const int n_test = std::clamp(static_cast<int>(std::lround(test_fraction * n)), 1, n - 1);
  std::vector<bool> is_test(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n_test; ++i) is_test[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
  VideoSplit split;
  for (int i = 0; i < n; ++i) {
    const auto& id = corpus.videos[static_cast<std::size_t>(i)].video_id;
    (is_test[static_cast<std::size_t>(i)] ? split.test : split.train).push_back(id);
  }
  return split;
}

caption::TokenVocabulary captioner_tokens(const core::Corpus& corpus, const std::vector<std::string>& video_ids) {
  std::vector<core::Tokens> sentences;
  for (const auto& a : corpus.vocab.actions()) sentences.push_back(a.description);
  for (const auto& id : video_ids) {
    const auto& v = find_video(corpus, id);
    sentences.insert(sentences.end(), v.captions.begin(), v.captions.end());
  }
  return caption::TokenVocabulary(sentences);
}

std::vector<caption::TrainingExample> captioner_examples(const core::Corpus& corpus,
                                                         const std::vector<std::string>& video_ids,
                                                         curation::WindowSetting setting,
                                                         const caption::TokenVocabulary& tokens) {
  std::vector<caption::TrainingExample> out;
  for (const auto& id : video_ids) {
    const auto& v = find_video(corpus, id);
    for (std::size_t s = 0; s < v.segments.size(); ++s) {
      for (auto role : {curation::WindowRole::Start, curation::WindowRole::Goal}) {
        const auto window =
            curation::observation_interval(v.segments[s].start, v.segments[s].end, role, setting, v.duration());
        out.push_back({curation::pool_features(v, window), tokens.encode(v.captions[s])});
      }
    }
  }
  return out;
}

std::uint64_t endpoint_seed(std::uint64_t seed, const std::string& tag, const EndpointKey& key) {
  const auto role = static_cast<std::uint64_t>(key.role == curation::WindowRole::Start ? 0 : 1);
  return derive_seed(seed, tag + ":" + key.video_id, static_cast<std::uint64_t>(key.segment) * 2 + role);
}

fs::path captioner_stem(const ExperimentConfig& config, const Workspace& ws) {
  return config.captioner_checkpoint.empty() ? ws.captioner() : config.captioner_checkpoint;
}

fs::path fold_stem(const fs::path& stem, int fold) { return fs::path(stem.string() + "_fold" + std::to_string(fold)); }

std::map<std::string, int> fold_assignment(const VideoSplit& split, int folds) {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < split.train.size(); ++i) out[split.train[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  return out;
}

EndpointEmbedder::EndpointEmbedder(const ExperimentConfig& config, const core::Corpus& corpus,
                                   const Workspace& ws)
    : config_(config),
      lookup_(predict::EmbeddingProvider::action_lookup(corpus.vocab, config.predictor.embed_dim)) {
  switch (config.conditioning) {
    case ConditioningMode::TextLookup:
      provider_ = lookup_;
      if (config.oracle != OracleEmbeddings::All) {
        require_file(ws.predictions(), "predict-actions");
        predictions_ = load_predictions(ws.predictions());
      }
      break;
    case ConditioningMode::CaptionText:
      provider_ = predict::EmbeddingProvider::caption_bag_of_words(config.predictor.embed_dim);
      require_file(ws.captions(), "caption");
      captions_ = load_captions(ws.captions());
      break;
    case ConditioningMode::Visual:
      provider_ = predict::EmbeddingProvider::visual_passthrough(corpus.feature_dim);
      break;
  }
}

int EndpointEmbedder::dim() const { return provider_.dim(); }

Eigen::VectorXd EndpointEmbedder::endpoint(const curation::CuratedSample& sample, const EndpointKey& key, int action,
                                           const Eigen::VectorXd& features, bool training) const {
  (void)sample;
  const bool oracle = config_.oracle == OracleEmbeddings::All || (config_.oracle == OracleEmbeddings::Train && training);
  if (oracle) return lookup_.table().col(action);
  switch (config_.conditioning) {
    case ConditioningMode::TextLookup: {
      auto it = predictions_.find(key);
      require(it != predictions_.end(), ErrorCode::Coverage,
              "no prediction for " + key.video_id + " segment " + std::to_string(key.segment));
      return predict::embed_prediction(it->second, provider_);
    }
    case ConditioningMode::CaptionText: {
      auto it = captions_.find(key);
      require(it != captions_.end(), ErrorCode::Coverage,
              "no captions for " + key.video_id + " segment " + std::to_string(key.segment));
      return predict::embed_caption(it->second, provider_);
    }
    case ConditioningMode::Visual:
      return predict::embed_visual(features, provider_);
  }
  fail(ErrorCode::Internal, "unhandled conditioning mode");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> EndpointEmbedder::embed(const curation::CuratedSample& sample,
                                                                    bool training) const {
  return {endpoint(sample, start_key(sample), sample.start_action(), sample.start_features, training),
          endpoint(sample, goal_key(sample), sample.goal_action(), sample.goal_features, training)};
}

void stage_gen_data(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest) {
  const core::Corpus corpus = build_corpus(config);
  core::save_corpus_dir(ws.corpus_dir(), corpus);
  for (const char* f : {"corpus.jsonl", "vocab.tsv", "tasks.tsv"}) add_artifact(manifest, ws.corpus_dir() / f);
}

void stage_curate(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest) {
  const core::Corpus corpus = workspace_corpus(ws);
  const VideoSplit split = split_videos(corpus, config.test_fraction, config.seed);
  save_split(ws.split(), split);
  add_artifact(manifest, ws.split());
  for (int h : config.horizons) {
    std::vector<curation::CuratedSample> train, test;
    for (const auto& v : corpus.videos) {
      auto samples = curation::extract_windows(v, h, config.setting);
      auto& dst = split.is_test(v.video_id) ? test : train;
      dst.insert(dst.end(), std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()));
    }
    fs::create_directories(ws.horizon_dir(h));
    curation::save_samples(ws.train_samples(h), train);
    curation::save_samples(ws.test_samples(h), test);
    add_artifact(manifest, ws.train_samples(h));
    add_artifact(manifest, ws.test_samples(h));
  }
}

caption::ProfessorForcingReport stage_train_captioner(const ExperimentConfig& config, const Workspace& ws,
                                                      RunManifest* manifest) {
  const int folds = config.captioner_folds;
  if (!config.captioner_checkpoint.empty()) {
    require_file(checkpoint_manifest_path(config.captioner_checkpoint), "train-captioner");
    add_checkpoint(manifest, config.captioner_checkpoint);
    for (int k = 0; folds > 1 && k < folds; ++k) {
      require_file(checkpoint_manifest_path(fold_stem(config.captioner_checkpoint, k)), "train-captioner");
      add_checkpoint(manifest, fold_stem(config.captioner_checkpoint, k));
    }
    return {};
  }
  const core::Corpus corpus = workspace_corpus(ws);
  require_file(ws.split(), "curate");
  const VideoSplit split = load_split(ws.split());
  const auto tokens = captioner_tokens(corpus, split.train);

  auto train = [&](const std::vector<std::string>& videos, std::uint64_t seed, const fs::path& stem) {
    const auto examples = captioner_examples(corpus, videos, config.setting, tokens);
    require(!examples.empty(), ErrorCode::Validation, "no captioner training examples");
    caption::CaptionModel model(corpus.feature_dim, tokens.size(), config.captioner_hidden, derive_seed(seed, "init"));
    caption::Discriminator disc(tokens.size(), corpus.feature_dim, 32, 32, derive_seed(seed, "disc"));
    caption::ProfessorForcingConfig pf = config.captioner;
    pf.seed = seed;
    auto report = caption::train_professor_forcing(model, disc, examples, pf);
    save_checkpoint(stem, caption::to_checkpoint(model, tokens, &disc));
    add_checkpoint(manifest, stem);
    return report;
  };

  const auto report = train(split.train, config.captioner.seed, ws.captioner());
  if (folds > 1) {
    const auto fold_of = fold_assignment(split, folds);
    for (int k = 0; k < folds; ++k) {
      std::vector<std::string> rest;
      for (const auto& v : split.train) {
        if (fold_of.at(v) != k) rest.push_back(v);
      }
      train(rest, derive_seed(config.captioner.seed, "fold", static_cast<std::uint64_t>(k)), fold_stem(ws.captioner(), k));
    }
  }

  auto log = open_out(ws.captioner_log());
  log << "epoch,token_ce,adversarial\n";
  char line[96];
  for (std::size_t e = 0; e < report.epoch_token_ce.size(); ++e) {
    std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f\n", e + 1, report.epoch_token_ce[e],
                  e < report.epoch_adversarial.size() ? report.epoch_adversarial[e] : 0.0);
    log << line;
  }
  add_artifact(manifest, ws.captioner_log());
  return report;
}

namespace {

// Every endpoint of every horizon's samples with its pooled features.
std::map<EndpointKey, Eigen::VectorXd> collect_endpoints(const ExperimentConfig& config, const Workspace& ws) {
  std::map<EndpointKey, Eigen::VectorXd> endpoints;
  for (int h : config.horizons) {
    for (const auto& path : {ws.train_samples(h), ws.test_samples(h)}) {
      require_file(path, "curate");
      for (const auto& s : curation::load_samples(path)) {
        endpoints.emplace(start_key(s), s.start_features);
        endpoints.emplace(goal_key(s), s.goal_features);
      }
    }
  }
  return endpoints;
}

}  // namespace

void stage_caption(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest) {
  struct Captioner {
    caption::CaptionModel model;
    caption::TokenVocabulary tokens;
  };
  auto load = [](const fs::path& stem) {
    require_file(checkpoint_manifest_path(stem), "train-captioner");
    const Checkpoint ckpt = load_checkpoint(stem);
    return Captioner{caption::caption_model_from_checkpoint(ckpt), caption::token_vocabulary_from_checkpoint(ckpt)};
  };
  const auto stem = captioner_stem(config, ws);
  const Captioner full = load(stem);
  std::vector<Captioner> held_out;
  std::map<std::string, int> fold_of;
  if (config.captioner_folds > 1) {
    require_file(ws.split(), "curate");
    fold_of = fold_assignment(load_split(ws.split()), config.captioner_folds);
    for (int k = 0; k < config.captioner_folds; ++k) held_out.push_back(load(fold_stem(stem, k)));
  }

  CaptionTable table;
  for (const auto& [key, features] : collect_endpoints(config, ws)) {
    auto fold = fold_of.find(key.video_id);
    const Captioner& c = fold == fold_of.end() ? full : held_out[static_cast<std::size_t>(fold->second)];
    require(features.size() == c.model.feature_dim(), ErrorCode::Validation,
            "captioner expects " + std::to_string(c.model.feature_dim()) + "-d features");
    auto drawn = caption::sample_descriptions(c.model, features, config.predictor.num_captions,
                                              endpoint_seed(config.seed, "caption", key),
                                              config.predictor.max_caption_length);
    auto& list = table[key];
    for (const auto& g : drawn) list.push_back({c.tokens.decode(g.tokens), g.nll});
  }
  save_captions(ws.captions(), table);
  add_artifact(manifest, ws.captions());
}

void stage_predict(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest) {
  const core::Corpus corpus = workspace_corpus(ws);
  require_file(ws.captions(), "caption");
  const CaptionTable captions = load_captions(ws.captions());
  std::map<std::string, int> task_of;
  for (const auto& v : corpus.videos) task_of[v.video_id] = v.task_id;

  const auto global = predict::all_candidates(corpus.vocab);
  PredictionTable table;
  for (const auto& [key, list] : captions) {
    auto task = task_of.find(key.video_id);
    require(task != task_of.end(), ErrorCode::Validation, "captions reference unknown video " + key.video_id);
    const auto candidates =
        config.predictor.global_candidates ? global : predict::task_candidates(corpus.vocab, task->second);
    auto p = predict::predict_action(list, candidates, config.predictor.threshold, config.predictor.variant);
    if (config.predictor.unknown == UnknownPolicy::Random) {
      p = predict::randomize_unknown(p, corpus.vocab.num_actions(), endpoint_seed(config.seed, "unknown", key));
    }
    table[key] = p;
  }
  save_predictions(ws.predictions(), table);
  add_artifact(manifest, ws.predictions());
  const auto lookup = predict::EmbeddingProvider::action_lookup(corpus.vocab, config.predictor.embed_dim);
  predict::save_embedding_table(ws.embedding_table(), lookup.table());
  add_artifact(manifest, ws.embedding_table());
}

void stage_train_planner(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest) {
  const core::Corpus corpus = workspace_corpus(ws);
  const EndpointEmbedder embedder(config, corpus, ws);
  for (int h : config.horizons) {
    require_file(ws.train_samples(h), "curate");
    std::vector<diffusion::PlannerSample> samples;
    for (const auto& s : curation::load_samples(ws.train_samples(h))) {
      auto [start, goal] = embedder.embed(s, true);
      samples.push_back({s.action_ids, std::move(start), std::move(goal)});
    }
    require(!samples.empty(), ErrorCode::Validation,
            "no training samples at horizon " + std::to_string(h) + " (videos too short?)");
    diffusion::PlannerConfig pc = config.planner;
    pc.seed = derive_seed(config.planner.seed, "horizon", static_cast<std::uint64_t>(h));
    diffusion::PlannerTrainReport report;
    const auto planner = diffusion::train_planner(samples, corpus.vocab.num_actions(), pc, &report);
    save_checkpoint(ws.planner(h), diffusion::to_checkpoint(planner));
    add_checkpoint(manifest, ws.planner(h));

    auto log = open_out(ws.planner_log(h));
    log << "epoch,lr,loss\n";
    char line[96];
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
      std::snprintf(line, sizeof(line), "%zu,%.8f,%.6f\n", e + 1, report.epoch_lr[e], report.epoch_loss[e]);
      log << line;
    }
    add_artifact(manifest, ws.planner_log(h));
  }
}

void stage_plan(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest) {
  const core::Corpus corpus = workspace_corpus(ws);
  const EndpointEmbedder embedder(config, corpus, ws);
  for (int h : config.horizons) {
    const fs::path stem = config.planner_checkpoint.empty() ? ws.planner(h) : config.planner_checkpoint;
    require_file(checkpoint_manifest_path(stem), "train-planner");
    require_file(ws.test_samples(h), "curate");
    const auto planner = diffusion::planner_from_checkpoint(load_checkpoint(stem));
    require(planner.denoiser.shape().horizon == h, ErrorCode::Validation,
            "planner checkpoint was trained for horizon " + std::to_string(planner.denoiser.shape().horizon));
    std::vector<PlanRecord> plans;
    for (const auto& s : curation::load_samples(ws.test_samples(h))) {
      const auto [start, goal] = embedder.embed(s, false);
      const auto seed = derive_seed(config.seed, "plan:" + s.video_id,
                                    static_cast<std::uint64_t>(s.first_segment) * 64 + static_cast<std::uint64_t>(h));
      plans.push_back({s.video_id, s.first_segment, s.action_ids, diffusion::sample_plan(planner, start, goal, seed)});
    }
    save_plans(ws.plans(h), plans);
    add_artifact(manifest, ws.plans(h));
  }
}

metrics::EvalReport stage_evaluate(const ExperimentConfig& config, const Workspace& ws, RunManifest* manifest) {
  metrics::EvalReport report;
  for (int h : config.horizons) {
    require_file(ws.plans(h), "plan");
    std::vector<metrics::Plan> preds, gts;
    for (const auto& p : load_plans(ws.plans(h))) {
      preds.push_back(p.predicted);
      gts.push_back(p.ground_truth);
    }
    require(!preds.empty(), ErrorCode::Validation, "no test plans at horizon " + std::to_string(h));
    report.horizons.push_back(metrics::evaluate(h, preds, gts));
  }
  metrics::write_csv(ws.report_csv(), report);
  open_out(ws.report_txt()) << metrics::to_table(report);
  add_artifact(manifest, ws.report_csv());
  add_artifact(manifest, ws.report_txt());

  if (config.uses_captions() && fs::exists(ws.captions()) && fs::exists(ws.split())) {
    const core::Corpus corpus = workspace_corpus(ws);
    const VideoSplit split = load_split(ws.split());
    std::vector<std::vector<predict::ScoredCaption>> captions;
    std::vector<core::Tokens> references;
    for (const auto& [key, list] : load_captions(ws.captions())) {
      if (!split.is_test(key.video_id) || list.empty()) continue;
      const auto& v = find_video(corpus, key.video_id);
      captions.push_back(list);
      references.push_back(v.captions.at(static_cast<std::size_t>(key.segment)));
    }
    if (!captions.empty()) {
      const auto r = metrics::rouge_report(captions, references);
      open_out(ws.rouge_csv()) << "metric,value\nrouge1," << metrics::format_percent(r.rouge1) << "\nrouge2,"
                               << metrics::format_percent(r.rouge2) << "\nendpoints," << captions.size() << '\n';
      add_artifact(manifest, ws.rouge_csv());
    }
  }
  return report;
}

PipelineResult run_pipeline(const ConfigTree& tree) {
  const ExperimentConfig config = parse_config(tree);
  const Workspace ws{config.output_dir};
  fs::create_directories(ws.root);
  write_config_tree(ws.config(), tree);

  PipelineResult result;
  RunManifest& m = result.manifest;
  m.config_hash = config_hash(tree);
  m.seeds = {{"experiment", config.seed}, {"captioner", config.captioner.seed}, {"planner", config.planner.seed}};
  m.artifacts.push_back(ws.config());

  run_stage("gen-data", &m, [&] { stage_gen_data(config, ws, &m); });
  run_stage("curate", &m, [&] { stage_curate(config, ws, &m); });
  if (config.uses_captions()) {
    run_stage("train-captioner", &m, [&] { stage_train_captioner(config, ws, &m); });
    run_stage("caption", &m, [&] { stage_caption(config, ws, &m); });
    if (config.conditioning == ConditioningMode::TextLookup) {
      run_stage("predict-actions", &m, [&] { stage_predict(config, ws, &m); });
    }
  }
  run_stage("train-planner", &m, [&] { stage_train_planner(config, ws, &m); });
  run_stage("plan", &m, [&] { stage_plan(config, ws, &m); });
  result.report = run_stage("evaluate", &m, [&] { return stage_evaluate(config, ws, &m); });
  write_manifest(ws.manifest(), m);
  return result;
}

std::pair<double, double> project_latent_stage(const ExperimentConfig& config, const Workspace& ws) {
  const core::Corpus corpus = workspace_corpus(ws);
  const int h = config.horizons.front();
  require_file(ws.test_samples(h), "curate");
  ExperimentConfig text = config;
  text.conditioning = ConditioningMode::TextLookup;
  text.oracle = fs::exists(ws.predictions()) ? OracleEmbeddings::None : OracleEmbeddings::All;
  const EndpointEmbedder embedder(text, corpus, ws);

  std::vector<Eigen::VectorXd> text_vecs, visual_vecs;
  std::vector<int> labels;
  for (const auto& s : curation::load_samples(ws.test_samples(h))) {
    text_vecs.push_back(embedder.embed(s, false).first);
    visual_vecs.push_back(s.start_features);
    labels.push_back(s.start_action());
  }
  const auto text_proj = project_latent(text_vecs);
  const auto visual_proj = project_latent(visual_vecs);
  write_latent_csv(ws.root / "latent_text.csv", text_proj.coords, labels);
  write_latent_csv(ws.root / "latent_visual.csv", visual_proj.coords, labels);
  write_latent_svg(ws.root / "latent.svg",
                   {{"text embedding", text_proj.coords, labels}, {"visual observation", visual_proj.coords, labels}});
  const double s_text = silhouette_score(text_proj.coords, labels);
  const double s_visual = silhouette_score(visual_proj.coords, labels);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "space,silhouette\ntext,%.6f\nvisual,%.6f\n", s_text, s_visual);
  open_out(ws.root / "latent_summary.csv") << buf;
  return {s_text, s_visual};
}

}  // namespace lap::pipeline
