#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "core/corpus.hpp"

namespace lap::curation {

enum class WindowSetting { KEPP, PDPP };
enum class WindowRole { Start, Goal };

WindowSetting parse_window_setting(std::string_view text);
const char* to_string(WindowSetting setting);

struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;

  double length() const { return end - begin; }
};

/// Observation window around one segment:
///   KEPP  start/goal: [seg_start - 1, seg_start + 2]
///   PDPP  start:      [seg_start, seg_start + 3]
///   PDPP  goal:       [seg_end - 2, seg_end + 1]
/// clamped to [0, duration].
TimeInterval observation_interval(double seg_start, double seg_end, WindowRole role,
                                  WindowSetting setting, double duration);

/// Mean of the 1-second feature buckets intersecting `window`; the nearest
/// bucket when none intersects.
Eigen::VectorXd pool_features(const core::AnnotatedVideo& video, const TimeInterval& window);

struct CuratedSample {
  std::string video_id;
  int task_id = 0;
  int first_segment = 0;
  std::vector<int> action_ids;  // length T
  TimeInterval start_window;
  TimeInterval goal_window;
  Eigen::VectorXd start_features;
  Eigen::VectorXd goal_features;
  core::Tokens start_caption;
  core::Tokens goal_caption;

  int horizon() const { return static_cast<int>(action_ids.size()); }
  int start_action() const { return action_ids.front(); }
  int goal_action() const { return action_ids.back(); }
};

/// Every run of `horizon` consecutive segments, stride 1.
std::vector<CuratedSample> extract_windows(const core::AnnotatedVideo& video, int horizon,
                                           WindowSetting setting);

std::vector<CuratedSample> extract_all(const std::vector<core::AnnotatedVideo>& videos, int horizon,
                                       WindowSetting setting);

void save_samples(const std::filesystem::path& path, const std::vector<CuratedSample>& samples);
std::vector<CuratedSample> load_samples(const std::filesystem::path& path);

}  // namespace lap::curation
