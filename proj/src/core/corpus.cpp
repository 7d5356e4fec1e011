#include "core/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace lap::core {

using nlohmann::json;

void validate_video(const AnnotatedVideo& video, const ActionVocabulary& vocab, int feature_dim) {
  const std::string who = "video " + video.video_id;
  require(video.task_id >= 0 && video.task_id < vocab.num_tasks(), ErrorCode::Validation,
          who + ": unknown task " + std::to_string(video.task_id));
  require(video.captions.size() == video.segments.size(), ErrorCode::Validation,
          who + ": caption track does not match segments");
  double prev_end = 0.0;
  for (std::size_t i = 0; i < video.segments.size(); ++i) {
    const auto& s = video.segments[i];
    require(vocab.contains(s.action_id), ErrorCode::Validation,
            who + ": unknown action " + std::to_string(s.action_id));
    require(s.start >= 0.0 && s.end > s.start, ErrorCode::Validation,
            who + ": segment " + std::to_string(i) + " has invalid bounds");
    require(i == 0 || s.start >= prev_end, ErrorCode::Validation,
            who + ": segments overlap or are out of order at " + std::to_string(i));
    prev_end = s.end;
  }
  require(!video.features.empty(), ErrorCode::Validation, who + ": empty feature track");
  for (const auto& f : video.features) {
    require(f.size() == feature_dim, ErrorCode::Validation, who + ": feature dimension mismatch");
  }
}

void SyntheticCorpusConfig::validate() const {
  require(num_tasks >= 1, ErrorCode::Validation, "num_tasks must be >= 1");
  require(actions_per_task >= 2, ErrorCode::Validation, "actions_per_task must be >= 2");
  require(num_actions >= actions_per_task, ErrorCode::Validation,
          "num_actions must be >= actions_per_task");
  require(num_tasks * actions_per_task >= num_actions, ErrorCode::Validation,
          "tasks cannot cover every action: num_tasks * actions_per_task < num_actions");
  require(num_videos >= 1, ErrorCode::Validation, "num_videos must be >= 1");
  require(min_segments >= 1 && min_segments <= max_segments, ErrorCode::Validation,
          "invalid horizon range");
  require(max_segments <= actions_per_task, ErrorCode::Validation,
          "horizon range exceeds actions_per_task");
  require(feature_dim >= 1, ErrorCode::Validation, "feature_dim must be >= 1");
  require(feature_noise_sigma >= 0.0, ErrorCode::Validation, "feature_noise_sigma must be >= 0");
  require(caption_noise_prob >= 0.0 && caption_noise_prob < 1.0, ErrorCode::Validation,
          "caption_noise_prob must be in [0, 1)");
  require(min_segment_seconds > 0.0 && min_segment_seconds <= max_segment_seconds,
          ErrorCode::Validation, "invalid segment duration range");
  require(max_gap_seconds >= 0.0, ErrorCode::Validation, "max_gap_seconds must be >= 0");
  std::set<int> grouped;
  for (const auto& group : confusable_groups) {
    for (int id : group) {
      require(id >= 0 && id < num_actions, ErrorCode::Validation,
              "confusable group references unknown action " + std::to_string(id));
      require(grouped.insert(id).second, ErrorCode::Validation,
              "confusable groups must be disjoint; action " + std::to_string(id) + " repeats");
    }
  }
}

const std::vector<std::string>& builtin_action_labels() {
  static const std::vector<std::string> labels = {
      "add coffee",     "add water",       "press coffee",     "pour coffee",
      "loosen nut",     "jack car",        "remove wheel",     "put wheel",
      "tighten nut",    "check breathing", "give compression", "give breath",
      "connect cable",  "start car",       "remove cable",     "remove plant",
      "put soil",       "even surface",
  };
  return labels;
}

std::string synthetic_action_label(int id) {
  const auto& builtin = builtin_action_labels();
  if (id < static_cast<int>(builtin.size())) return builtin[static_cast<std::size_t>(id)];
  static const std::vector<std::string> verbs = {"cut", "fold", "mix", "place", "clean", "open",
                                                 "close", "lift", "turn", "wipe", "spread"};
  static const std::vector<std::string> nouns = {"board", "paper", "bowl", "handle", "lid", "tray",
                                                 "frame", "bolt", "sheet", "pipe", "cloth", "jar", "rope"};
  const auto k = static_cast<std::size_t>(id - static_cast<int>(builtin.size()));
  // Distinct (verb, noun) pairs for the first |verbs|*|nouns| ids; beyond that an index suffix.
  const std::size_t pair = k % (verbs.size() * nouns.size());
  std::string label = verbs[pair % verbs.size()] + " " + nouns[pair / verbs.size()];
  if (k >= verbs.size() * nouns.size()) label += " " + std::to_string(k / (verbs.size() * nouns.size()));
  return label;
}

std::vector<Eigen::VectorXd> cluster_centers(const SyntheticCorpusConfig& config) {
  Rng rng = make_rng(config.seed, "centers");
  std::map<int, int> group_of;
  for (std::size_t g = 0; g < config.confusable_groups.size(); ++g) {
    for (int id : config.confusable_groups[g]) group_of[id] = static_cast<int>(g);
  }
  std::map<int, Eigen::VectorXd> group_center;
  auto draw = [&] {
    Eigen::VectorXd v(config.feature_dim);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = standard_normal(rng);
    return Eigen::VectorXd(v / v.norm());
  };
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(static_cast<std::size_t>(config.num_actions));
  for (int id = 0; id < config.num_actions; ++id) {
    auto g = group_of.find(id);
    if (g == group_of.end()) {
      centers.push_back(draw());
      continue;
    }
    auto c = group_center.find(g->second);
    if (c == group_center.end()) c = group_center.emplace(g->second, draw()).first;
    centers.push_back(c->second);
  }
  return centers;
}

namespace {

// Number of (start, goal) pairs two positions apart that admit more than one
// middle action across all tasks.
int gap_two_ambiguity(const std::vector<std::vector<int>>& tasks) {
  std::map<std::pair<int, int>, std::set<int>> middles;
  for (const auto& order : tasks) {
    for (std::size_t i = 0; i + 2 < order.size(); ++i) {
      middles[{order[i], order[i + 2]}].insert(order[i + 1]);
    }
  }
  int ambiguous = 0;
  for (const auto& [key, mids] : middles) ambiguous += mids.size() > 1 ? 1 : 0;
  return ambiguous;
}

}  // namespace

std::vector<std::vector<int>> synthetic_task_orders(const SyntheticCorpusConfig& config) {
  config.validate();
  const int k = config.num_tasks;
  const int per_task = config.actions_per_task;
  std::vector<std::vector<int>> best;
  int best_score = -1;
  // Shared actions can make a (start, goal) pair ambiguous; keep the draw with
  // the fewest such pairs.
  for (int attempt = 0; attempt < 256; ++attempt) {
    Rng rng = make_rng(config.seed, "tasks", static_cast<std::uint64_t>(attempt));
    std::vector<int> perm(static_cast<std::size_t>(config.num_actions));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<int>> tasks(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < perm.size(); ++i) tasks[i % static_cast<std::size_t>(k)].push_back(perm[i]);
    for (auto& order : tasks) {
      std::vector<int> pool = perm;
      std::shuffle(pool.begin(), pool.end(), rng);
      for (int id : pool) {
        if (static_cast<int>(order.size()) >= per_task) break;
        if (std::find(order.begin(), order.end(), id) == order.end()) order.push_back(id);
      }
      std::shuffle(order.begin(), order.end(), rng);
    }
    const int score = gap_two_ambiguity(tasks);
    if (best_score < 0 || score < best_score) {
      best = std::move(tasks);
      best_score = score;
    }
    if (best_score == 0) break;
  }
  return best;
}

ActionVocabulary synthetic_vocabulary(const SyntheticCorpusConfig& config) {
  auto task_orders = synthetic_task_orders(config);
  std::vector<Action> actions;
  for (int id = 0; id < config.num_actions; ++id) {
    Tokens label = tokenize(synthetic_action_label(id));
    actions.push_back(Action{id, label, label});
  }
  std::vector<std::string> task_names;
  for (int t = 0; t < config.num_tasks; ++t) task_names.push_back("task_" + std::to_string(t));
  return ActionVocabulary(std::move(actions), std::move(task_names), std::move(task_orders),
                          DescriptionSource::Original);
}

std::vector<std::vector<int>> cross_task_groups(const ActionVocabulary& vocab, int count, int size) {
  require(count >= 0 && size >= 2, ErrorCode::InvalidArgument, "cross_task_groups: bad group shape");
  const int n = vocab.num_actions();
  std::vector<std::set<int>> tasks_of(static_cast<std::size_t>(n));
  for (int t = 0; t < vocab.num_tasks(); ++t) {
    for (int a : vocab.task_actions(t)) tasks_of[static_cast<std::size_t>(a)].insert(t);
  }
  auto compatible = [&](int a, int b) {
    for (int t : tasks_of[static_cast<std::size_t>(a)]) {
      if (tasks_of[static_cast<std::size_t>(b)].count(t)) return false;
    }
    return true;
  };
  std::vector<std::vector<int>> groups;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<int> current;
  // Depth-first over ids in increasing order within a group.
  std::function<bool()> search = [&]() -> bool {
    if (static_cast<int>(groups.size()) == count) return true;
    const int from = current.empty() ? 0 : current.back() + 1;
    for (int a = from; a < n; ++a) {
      if (used[static_cast<std::size_t>(a)]) continue;
      if (!std::all_of(current.begin(), current.end(), [&](int b) { return compatible(a, b); })) continue;
      used[static_cast<std::size_t>(a)] = true;
      current.push_back(a);
      bool done;
      if (static_cast<int>(current.size()) == size) {
        groups.push_back(current);
        auto saved = current;
        current.clear();
        done = search();
        current = saved;
        if (!done) groups.pop_back();
      } else {
        done = search();
      }
      if (done) return true;
      current.pop_back();
      used[static_cast<std::size_t>(a)] = false;
    }
    return false;
  };
  require(search(), ErrorCode::Validation,
          "no " + std::to_string(count) + " groups of " + std::to_string(size) + " actions without a shared task");
  return groups;
}

Corpus generate_synthetic_corpus(const SyntheticCorpusConfig& config) {
  config.validate();
  ActionVocabulary vocab = synthetic_vocabulary(config);
  if (config.descriptions) vocab = vocab.with_descriptions(*config.descriptions);
  const std::vector<std::vector<int>> task_orders = [&] {
    std::vector<std::vector<int>> orders;
    for (int t = 0; t < vocab.num_tasks(); ++t) orders.push_back(vocab.task_actions(t));
    return orders;
  }();

  const auto centers = cluster_centers(config);
  std::set<std::string> pool_set;
  for (const auto& a : vocab.actions()) pool_set.insert(a.description.begin(), a.description.end());
  const std::vector<std::string> token_pool(pool_set.begin(), pool_set.end());

  Corpus corpus{vocab, {}, config.feature_dim};
  corpus.videos.resize(static_cast<std::size_t>(config.num_videos));
  for (int v = 0; v < config.num_videos; ++v) {
    Rng rng = make_rng(config.seed, "video", static_cast<std::uint64_t>(v));
    AnnotatedVideo& video = corpus.videos[static_cast<std::size_t>(v)];
    char id[32];
    std::snprintf(id, sizeof(id), "v%05d", v);
    video.video_id = id;
    video.task_id = uniform_int(rng, 0, config.num_tasks - 1);
    const auto& order = task_orders[static_cast<std::size_t>(video.task_id)];
    const int n = uniform_int(rng, config.min_segments, config.max_segments);
    const int offset = uniform_int(rng, 0, config.actions_per_task - n);

    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
    double t = uniform(0.5, 2.0);
    for (int j = 0; j < n; ++j) {
      const double length = uniform(config.min_segment_seconds, config.max_segment_seconds);
      video.segments.push_back(Segment{order[static_cast<std::size_t>(offset + j)], t, t + length});
      t += length + uniform(0.0, config.max_gap_seconds);
    }
    const auto buckets = static_cast<std::size_t>(std::ceil(video.segments.back().end + uniform(1.0, 2.0)));

    video.features.reserve(buckets);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < buckets; ++k) {
      const double mid = static_cast<double>(k) + 0.5;
      while (seg < video.segments.size() && video.segments[seg].end <= mid) ++seg;
      Eigen::VectorXd f(config.feature_dim);
      for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = config.feature_noise_sigma * standard_normal(rng);
      if (seg < video.segments.size() && video.segments[seg].start <= mid) {
        f += centers[static_cast<std::size_t>(video.segments[seg].action_id)];
      }
      video.features.push_back(std::move(f));
    }

    for (const auto& s : video.segments) {
      Tokens caption = vocab.action(s.action_id).description;
      for (auto& token : caption) {
        const double u = uniform01(rng);
        const int pick = uniform_int(rng, 0, static_cast<int>(token_pool.size()) - 1);
        if (u < config.caption_noise_prob) token = token_pool[static_cast<std::size_t>(pick)];
      }
      video.captions.push_back(std::move(caption));
    }
    validate_video(video, vocab, config.feature_dim);
  }
  return corpus;
}

namespace {

json video_to_json(const AnnotatedVideo& video) {
  json segments = json::array();
  for (const auto& s : video.segments) {
    segments.push_back({{"action_id", s.action_id}, {"start", s.start}, {"end", s.end}});
  }
  json features = json::array();
  for (const auto& f : video.features) features.push_back(std::vector<double>(f.data(), f.data() + f.size()));
  return json{{"video_id", video.video_id},
              {"task_id", video.task_id},
              {"segments", std::move(segments)},
              {"features", std::move(features)},
              {"captions", video.captions}};
}

AnnotatedVideo video_from_json(const json& j) {
  AnnotatedVideo video;
  video.video_id = j.at("video_id").get<std::string>();
  video.task_id = j.at("task_id").get<int>();
  for (const auto& s : j.at("segments")) {
    video.segments.push_back(Segment{s.at("action_id").get<int>(), s.at("start").get<double>(),
                                     s.at("end").get<double>()});
  }
  for (const auto& f : j.at("features")) {
    const auto values = f.get<std::vector<double>>();
    video.features.push_back(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  video.captions = j.at("captions").get<std::vector<Tokens>>();
  return video;
}

}  // namespace

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  for (const auto& video : corpus.videos) out << video_to_json(video).dump() << '\n';
}

std::vector<AnnotatedVideo> load_videos(const std::filesystem::path& path, const ActionVocabulary& vocab) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot open " + path.string());
  std::vector<AnnotatedVideo> videos;
  std::string line;
  int line_no = 0;
  int feature_dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      videos.push_back(video_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const auto& v = videos.back();
    if (feature_dim < 0 && !v.features.empty()) feature_dim = static_cast<int>(v.features.front().size());
    validate_video(v, vocab, feature_dim);
  }
  return videos;
}

void save_corpus_dir(const std::filesystem::path& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  save_corpus(dir / "corpus.jsonl", corpus);
  save_vocabulary_file(dir / "vocab.tsv", corpus.vocab);
  save_task_file(dir / "tasks.tsv", corpus.vocab);
}

Corpus load_corpus_dir(const std::filesystem::path& dir) {
  Corpus corpus;
  corpus.vocab = load_vocabulary(dir / "vocab.tsv", dir / "tasks.tsv");
  corpus.videos = load_videos(dir / "corpus.jsonl", corpus.vocab);
  require(!corpus.videos.empty(), ErrorCode::Validation, "corpus " + dir.string() + " has no videos");
  corpus.feature_dim = static_cast<int>(corpus.videos.front().features.front().size());
  return corpus;
}

}  // namespace lap::core
