#include "pipeline/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "core/vocabulary.hpp"

namespace lap::pipeline {

namespace pt = boost::property_tree;

ConditioningMode parse_conditioning_mode(std::string_view text) {
  if (text == "text" || text == "lap") return ConditioningMode::TextLookup;
  if (text == "caption_text" || text == "lap-text") return ConditioningMode::CaptionText;
  if (text == "visual" || text == "lap-vo") return ConditioningMode::Visual;
  fail(ErrorCode::InvalidArgument,
       "unknown conditioning mode '" + std::string(text) + "' (expected text, caption_text or visual)");
}

const char* to_string(ConditioningMode mode) {
  switch (mode) {
    case ConditioningMode::TextLookup: return "text";
    case ConditioningMode::CaptionText: return "caption_text";
    case ConditioningMode::Visual: return "visual";
  }
  return "?";
}

UnknownPolicy parse_unknown_policy(std::string_view text) {
  if (text == "zero") return UnknownPolicy::Zero;
  if (text == "random") return UnknownPolicy::Random;
  fail(ErrorCode::InvalidArgument, "unknown policy '" + std::string(text) + "' (expected zero or random)");
}

const char* to_string(UnknownPolicy policy) { return policy == UnknownPolicy::Zero ? "zero" : "random"; }

OracleEmbeddings parse_oracle_embeddings(std::string_view text) {
  if (text == "none") return OracleEmbeddings::None;
  if (text == "train") return OracleEmbeddings::Train;
  if (text == "all") return OracleEmbeddings::All;
  fail(ErrorCode::InvalidArgument, "unknown oracle mode '" + std::string(text) + "' (expected none, train or all)");
}

const char* to_string(OracleEmbeddings oracle) {
  switch (oracle) {
    case OracleEmbeddings::None: return "none";
    case OracleEmbeddings::Train: return "train";
    case OracleEmbeddings::All: return "all";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  require(!horizons.empty(), ErrorCode::Validation, "experiment.horizons is empty");
  for (int h : horizons) require(h >= 2, ErrorCode::Validation, "horizons must be >= 2");
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorCode::Validation, "test_fraction must be in (0, 1)");
  require(predictor.num_captions >= 1, ErrorCode::Validation, "predictor.num_captions must be >= 1");
  require(predictor.embed_dim >= 1, ErrorCode::Validation, "predictor.embed_dim must be >= 1");
  require(predictor.max_caption_length >= 1, ErrorCode::Validation, "predictor.max_caption_length must be >= 1");
  require(captioner_folds >= 1, ErrorCode::Validation, "captioner.folds must be >= 1");
  require(captioner_hidden >= 1, ErrorCode::Validation, "captioner.hidden must be >= 1");
  require(oracle == OracleEmbeddings::None || conditioning == ConditioningMode::TextLookup, ErrorCode::Validation,
          "oracle embeddings require conditioning = text");
  require(planner_checkpoint.empty() || horizons.size() == 1, ErrorCode::Validation,
          "planner.checkpoint needs a single horizon");
  if (corpus_path.empty()) corpus.validate();
  planner.validate();
}

ConfigTree default_config_tree() {
  ConfigTree t;
  t.put("experiment.seed", "1");
  t.put("experiment.setting", "kepp");
  t.put("experiment.horizons", "3");
  t.put("experiment.conditioning", "text");
  t.put("experiment.test_fraction", "0.3");
  t.put("experiment.oracle_embeddings", "none");
  t.put("experiment.output_dir", "out");

  t.put("corpus.path", "");
  t.put("corpus.descriptions", "");
  t.put("corpus.num_tasks", "5");
  t.put("corpus.actions_per_task", "6");
  t.put("corpus.num_actions", "18");
  t.put("corpus.num_videos", "150");
  t.put("corpus.min_segments", "3");
  t.put("corpus.max_segments", "6");
  t.put("corpus.feature_dim", "32");
  t.put("corpus.feature_noise_sigma", "0.5");
  t.put("corpus.caption_noise_prob", "0.0");
  t.put("corpus.confusable_groups", "");
  t.put("corpus.min_segment_seconds", "4");
  t.put("corpus.max_segment_seconds", "10");
  t.put("corpus.max_gap_seconds", "2");

  t.put("predictor.threshold", "0.5");
  t.put("predictor.variant", "precision");
  t.put("predictor.unknown", "zero");
  t.put("predictor.global_candidates", "false");
  t.put("predictor.num_captions", "20");
  t.put("predictor.embed_dim", "32");
  t.put("predictor.max_caption_length", "24");

  t.put("captioner.epochs", "30");
  t.put("captioner.batch_size", "9");
  t.put("captioner.lr", "0.005");
  t.put("captioner.disc_lr", "0.001");
  t.put("captioner.w", "0.1");
  t.put("captioner.ratio_start", "0.8");
  t.put("captioner.ratio_end", "0.1");
  t.put("captioner.teacher_when_below", "true");
  t.put("captioner.hidden", "64");
  t.put("captioner.folds", "5");
  t.put("captioner.grad_clip", "5");
  t.put("captioner.weight_decay", "0");
  t.put("captioner.checkpoint", "");

  t.put("planner.steps", "50");
  t.put("planner.epochs", "130");
  t.put("planner.steps_per_epoch", "50");
  t.put("planner.batch_size", "128");
  t.put("planner.peak_lr", "0.0003");
  t.put("planner.warmup_epochs", "90");
  t.put("planner.decay_every", "0");
  t.put("planner.decay_factor", "0.5");
  t.put("planner.decay_start_epoch", "0");
  t.put("planner.hidden", "256");
  t.put("planner.beta_first", "0.0001");
  t.put("planner.beta_last", "0.02");
  t.put("planner.weight_decay", "0");
  t.put("planner.seed", "0");
  t.put("planner.checkpoint", "");
  return t;
}

void set_config_value(ConfigTree& tree, const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  require(dot != std::string::npos && dot > 0 && dot + 1 < key.size(), ErrorCode::InvalidArgument,
          "config keys take the form section.key, got '" + key + "'");
  const auto known = default_config_tree().get_optional<std::string>(key);
  require(known.has_value(), ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  tree.put(key, value);
}

ConfigTree read_config_tree(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorCode::Io, "config file not found: " + path.string());
  ConfigTree file;
  try {
    pt::read_ini(path.string(), file);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::Parse, e.what());
  }
  ConfigTree tree = default_config_tree();
  for (const auto& [section, entries] : file) {
    require(!entries.empty() || entries.data().empty(), ErrorCode::Parse,
            path.string() + ": key '" + section + "' is outside any section");
    for (const auto& [key, value] : entries) set_config_value(tree, section + "." + key, value.data());
  }
  return tree;
}

std::string render_config(const ConfigTree& tree) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, entries] : tree) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [key, value] : entries) out << key << " = " << value.data() << '\n';
  }
  return out.str();
}

void write_config_tree(const std::filesystem::path& path, const ConfigTree& tree) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  out << render_config(tree);
}

std::uint64_t config_hash(const ConfigTree& tree) { return fnv1a64(render_config(tree)); }

namespace {

template <typename T>
T get(const ConfigTree& tree, const std::string& key) {
  const auto raw = tree.get<std::string>(key);
  try {
    return tree.get<T>(key);
  } catch (const pt::ptree_bad_data&) {
    fail(ErrorCode::Parse, "config key " + key + " has invalid value '" + raw + "'");
  }
}

bool get_bool(const ConfigTree& tree, const std::string& key) {
  const auto raw = tree.get<std::string>(key);
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  fail(ErrorCode::Parse, "config key " + key + " expects a boolean, got '" + raw + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Group members are action ids or labels of the synthetic vocabulary.
std::vector<std::vector<int>> resolve_groups(const std::vector<std::vector<std::string>>& groups, int num_actions) {
  std::vector<std::vector<int>> out;
  for (const auto& group : groups) {
    std::vector<int> ids;
    for (const auto& member : group) {
      int id = -1;
      if (!member.empty() && std::all_of(member.begin(), member.end(), ::isdigit)) {
        id = std::stoi(member);
      } else {
        const auto wanted = core::tokenize(member);
        for (int a = 0; a < num_actions; ++a) {
          if (core::tokenize(core::synthetic_action_label(a)) == wanted) id = a;
        }
        // Labels may also be written with underscores.
        if (id < 0) {
          std::string spaced = member;
          std::replace(spaced.begin(), spaced.end(), '_', ' ');
          for (int a = 0; a < num_actions; ++a) {
            if (core::synthetic_action_label(a) == spaced) id = a;
          }
        }
      }
      require(id >= 0 && id < num_actions, ErrorCode::Validation,
              "confusable group member '" + member + "' is not an action of the vocabulary");
      ids.push_back(id);
    }
    out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const ConfigTree& tree) {
  ExperimentConfig c;
  c.seed = get<std::uint64_t>(tree, "experiment.seed");
  c.setting = curation::parse_window_setting(get<std::string>(tree, "experiment.setting"));
  c.horizons.clear();
  for (const auto& h : split(get<std::string>(tree, "experiment.horizons"), ',')) {
    try {
      c.horizons.push_back(std::stoi(h));
    } catch (const std::exception&) {
      fail(ErrorCode::Parse, "experiment.horizons: bad value '" + h + "'");
    }
  }
  c.conditioning = parse_conditioning_mode(get<std::string>(tree, "experiment.conditioning"));
  c.test_fraction = get<double>(tree, "experiment.test_fraction");
  c.oracle = parse_oracle_embeddings(get<std::string>(tree, "experiment.oracle_embeddings"));
  c.output_dir = get<std::string>(tree, "experiment.output_dir");

  c.corpus_path = get<std::string>(tree, "corpus.path");
  c.descriptions_path = get<std::string>(tree, "corpus.descriptions");
  auto& k = c.corpus;
  k.num_tasks = get<int>(tree, "corpus.num_tasks");
  k.actions_per_task = get<int>(tree, "corpus.actions_per_task");
  k.num_actions = get<int>(tree, "corpus.num_actions");
  k.num_videos = get<int>(tree, "corpus.num_videos");
  k.min_segments = get<int>(tree, "corpus.min_segments");
  k.max_segments = get<int>(tree, "corpus.max_segments");
  k.feature_dim = get<int>(tree, "corpus.feature_dim");
  k.feature_noise_sigma = get<double>(tree, "corpus.feature_noise_sigma");
  k.caption_noise_prob = get<double>(tree, "corpus.caption_noise_prob");
  k.min_segment_seconds = get<double>(tree, "corpus.min_segment_seconds");
  k.max_segment_seconds = get<double>(tree, "corpus.max_segment_seconds");
  k.max_gap_seconds = get<double>(tree, "corpus.max_gap_seconds");
  k.seed = c.seed;
  const auto groups = get<std::string>(tree, "corpus.confusable_groups");
  if (groups.rfind("auto", 0) == 0) {
    // auto[:size]: groups of `size` (default 3) covering half the vocabulary,
    // members never sharing a task.
    int size = 3;
    if (groups.size() > 4) {
      require(groups[4] == ':', ErrorCode::Parse, "corpus.confusable_groups: expected auto or auto:<size>");
      size = std::stoi(groups.substr(5));
    }
    k.confusable_groups.clear();
    k.confusable_groups = core::cross_task_groups(core::synthetic_vocabulary(k), k.num_actions / 2 / size, size);
    for (const auto& g : k.confusable_groups) {
      std::vector<std::string> ids;
      for (int id : g) ids.push_back(std::to_string(id));
      c.confusable_labels.push_back(ids);
    }
  } else {
    for (const auto& group : split(groups, ';')) c.confusable_labels.push_back(split(group, ','));
    k.confusable_groups = resolve_groups(c.confusable_labels, k.num_actions);
  }

  auto& p = c.predictor;
  p.threshold = get<double>(tree, "predictor.threshold");
  p.variant = predict::parse_rouge_variant(get<std::string>(tree, "predictor.variant"));
  p.unknown = parse_unknown_policy(get<std::string>(tree, "predictor.unknown"));
  p.global_candidates = get_bool(tree, "predictor.global_candidates");
  p.num_captions = get<int>(tree, "predictor.num_captions");
  p.embed_dim = get<int>(tree, "predictor.embed_dim");
  p.max_caption_length = get<int>(tree, "predictor.max_caption_length");

  auto& cap = c.captioner;
  cap.epochs = get<int>(tree, "captioner.epochs");
  cap.batch_size = get<int>(tree, "captioner.batch_size");
  cap.lr = get<double>(tree, "captioner.lr");
  cap.disc_lr = get<double>(tree, "captioner.disc_lr");
  cap.w = get<double>(tree, "captioner.w");
  cap.ratio_start = get<double>(tree, "captioner.ratio_start");
  cap.ratio_end = get<double>(tree, "captioner.ratio_end");
  cap.teacher_when_below = get_bool(tree, "captioner.teacher_when_below");
  cap.grad_clip = get<double>(tree, "captioner.grad_clip");
  cap.weight_decay = get<double>(tree, "captioner.weight_decay");
  cap.seed = derive_seed(c.seed, "captioner");
  c.captioner_hidden = get<int>(tree, "captioner.hidden");
  c.captioner_folds = get<int>(tree, "captioner.folds");
  c.captioner_checkpoint = get<std::string>(tree, "captioner.checkpoint");

  auto& pl = c.planner;
  pl.diffusion_steps = get<int>(tree, "planner.steps");
  pl.epochs = get<int>(tree, "planner.epochs");
  pl.steps_per_epoch = get<int>(tree, "planner.steps_per_epoch");
  pl.batch_size = get<int>(tree, "planner.batch_size");
  pl.peak_lr = get<double>(tree, "planner.peak_lr");
  pl.warmup_epochs = get<int>(tree, "planner.warmup_epochs");
  pl.decay_every = get<int>(tree, "planner.decay_every");
  pl.decay_factor = get<double>(tree, "planner.decay_factor");
  pl.decay_start_epoch = get<int>(tree, "planner.decay_start_epoch");
  pl.hidden = get<int>(tree, "planner.hidden");
  pl.beta_first = get<double>(tree, "planner.beta_first");
  pl.beta_last = get<double>(tree, "planner.beta_last");
  pl.weight_decay = get<double>(tree, "planner.weight_decay");
  // 0 derives the planner seed from the experiment seed.
  const auto planner_seed = get<std::uint64_t>(tree, "planner.seed");
  pl.seed = planner_seed ? planner_seed : derive_seed(c.seed, "planner");
  c.planner_checkpoint = get<std::string>(tree, "planner.checkpoint");

  c.validate();
  return c;
}

}  // namespace lap::pipeline
