#include "curation/curation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "common/error.hpp"

namespace lap::curation {

using nlohmann::json;

WindowSetting parse_window_setting(std::string_view text) {
  if (text == "kepp" || text == "KEPP") return WindowSetting::KEPP;
  if (text == "pdpp" || text == "PDPP") return WindowSetting::PDPP;
  fail(ErrorCode::InvalidArgument, "unknown window setting '" + std::string(text) + "' (expected kepp or pdpp)");
}

const char* to_string(WindowSetting setting) {
  return setting == WindowSetting::KEPP ? "kepp" : "pdpp";
}

TimeInterval observation_interval(double seg_start, double seg_end, WindowRole role,
                                  WindowSetting setting, double duration) {
  TimeInterval w;
  if (setting == WindowSetting::KEPP) {
    w = {seg_start - 1.0, seg_start + 2.0};
  } else if (role == WindowRole::Start) {
    w = {seg_start, seg_start + 3.0};
  } else {
    w = {seg_end - 2.0, seg_end + 1.0};
  }
  w.begin = std::clamp(w.begin, 0.0, duration);
  w.end = std::clamp(w.end, 0.0, duration);
  return w;
}

Eigen::VectorXd pool_features(const core::AnnotatedVideo& video, const TimeInterval& window) {
  require(!video.features.empty(), ErrorCode::Validation, "video " + video.video_id + " has no features");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(video.features.front().size());
  int count = 0;
  for (std::size_t k = 0; k < video.features.size(); ++k) {
    const double lo = static_cast<double>(k);
    if (lo < window.end && lo + 1.0 > window.begin) {
      sum += video.features[k];
      ++count;
    }
  }
  if (count > 0) return sum / count;
  const double centre = 0.5 * (window.begin + window.end);
  const auto last = static_cast<double>(video.features.size() - 1);
  const auto nearest = static_cast<std::size_t>(std::clamp(std::floor(centre), 0.0, last));
  return video.features[nearest];
}

std::vector<CuratedSample> extract_windows(const core::AnnotatedVideo& video, int horizon,
                                           WindowSetting setting) {
  require(horizon >= 2, ErrorCode::Validation, "horizon must be >= 2, got " + std::to_string(horizon));
  std::vector<CuratedSample> out;
  const int n = static_cast<int>(video.segments.size());
  for (int first = 0; first + horizon <= n; ++first) {
    CuratedSample s;
    s.video_id = video.video_id;
    s.task_id = video.task_id;
    s.first_segment = first;
    for (int j = 0; j < horizon; ++j) s.action_ids.push_back(video.segments[static_cast<std::size_t>(first + j)].action_id);
    const auto& head = video.segments[static_cast<std::size_t>(first)];
    const auto& tail = video.segments[static_cast<std::size_t>(first + horizon - 1)];
    s.start_window = observation_interval(head.start, head.end, WindowRole::Start, setting, video.duration());
    s.goal_window = observation_interval(tail.start, tail.end, WindowRole::Goal, setting, video.duration());
    s.start_features = pool_features(video, s.start_window);
    s.goal_features = pool_features(video, s.goal_window);
    s.start_caption = video.captions[static_cast<std::size_t>(first)];
    s.goal_caption = video.captions[static_cast<std::size_t>(first + horizon - 1)];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<CuratedSample> extract_all(const std::vector<core::AnnotatedVideo>& videos, int horizon,
                                       WindowSetting setting) {
  std::vector<CuratedSample> out;
  for (const auto& v : videos) {
    auto part = extract_windows(v, horizon, setting);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_json_vector(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void save_samples(const std::filesystem::path& path, const std::vector<CuratedSample>& samples) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  for (const auto& s : samples) {
    json j{{"video_id", s.video_id},
           {"task_id", s.task_id},
           {"first_segment", s.first_segment},
           {"horizon", s.horizon()},
           {"action_ids", s.action_ids},
           {"start_window", {s.start_window.begin, s.start_window.end}},
           {"goal_window", {s.goal_window.begin, s.goal_window.end}},
           {"start_features", to_vector(s.start_features)},
           {"goal_features", to_vector(s.goal_features)},
           {"start_caption", s.start_caption},
           {"goal_caption", s.goal_caption}};
    out << j.dump() << '\n';
  }
}

std::vector<CuratedSample> load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot open " + path.string());
  std::vector<CuratedSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      CuratedSample s;
      s.video_id = j.at("video_id").get<std::string>();
      s.task_id = j.at("task_id").get<int>();
      s.first_segment = j.at("first_segment").get<int>();
      s.action_ids = j.at("action_ids").get<std::vector<int>>();
      const auto sw = j.at("start_window").get<std::vector<double>>();
      const auto gw = j.at("goal_window").get<std::vector<double>>();
      require(sw.size() == 2 && gw.size() == 2, ErrorCode::Parse, "window must have 2 values");
      s.start_window = {sw[0], sw[1]};
      s.goal_window = {gw[0], gw[1]};
      s.start_features = from_json_vector(j.at("start_features"));
      s.goal_features = from_json_vector(j.at("goal_features"));
      s.start_caption = j.at("start_caption").get<core::Tokens>();
      s.goal_caption = j.at("goal_caption").get<core::Tokens>();
      require(s.horizon() == j.at("horizon").get<int>(), ErrorCode::Parse, "horizon does not match action_ids");
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lap::curation
