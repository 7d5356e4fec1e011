#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "curation/curation.hpp"
#include "metrics/metrics.hpp"
#include "predict/predictor.hpp"

namespace lap::pipeline {

/// One observation endpoint: a segment of a video seen from one role.
struct EndpointKey {
  std::string video_id;
  int segment = 0;
  curation::WindowRole role = curation::WindowRole::Start;

  auto tie() const { return std::tie(video_id, segment, role); }
  bool operator<(const EndpointKey& o) const { return tie() < o.tie(); }
  bool operator==(const EndpointKey& o) const { return tie() == o.tie(); }
};

const char* to_string(curation::WindowRole role);
curation::WindowRole parse_window_role(std::string_view text);

EndpointKey start_key(const curation::CuratedSample& sample);
EndpointKey goal_key(const curation::CuratedSample& sample);

using CaptionTable = std::map<EndpointKey, std::vector<predict::ScoredCaption>>;
using PredictionTable = std::map<EndpointKey, predict::Prediction>;

void save_captions(const std::filesystem::path& path, const CaptionTable& table);
CaptionTable load_captions(const std::filesystem::path& path);

void save_predictions(const std::filesystem::path& path, const PredictionTable& table);
PredictionTable load_predictions(const std::filesystem::path& path);

struct PlanRecord {
  std::string video_id;
  int first_segment = 0;
  metrics::Plan ground_truth;
  metrics::Plan predicted;
};

void save_plans(const std::filesystem::path& path, const std::vector<PlanRecord>& plans);
std::vector<PlanRecord> load_plans(const std::filesystem::path& path);

/// `<video_id>\t<train|test>` per video, in corpus order.
struct VideoSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;

  bool is_test(const std::string& video_id) const;
};

void save_split(const std::filesystem::path& path, const VideoSplit& split);
VideoSplit load_split(const std::filesystem::path& path);

}  // namespace lap::pipeline
