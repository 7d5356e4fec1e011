#include "pipeline/records.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "common/error.hpp"

namespace lap::pipeline {

using nlohmann::json;

const char* to_string(curation::WindowRole role) {
  return role == curation::WindowRole::Start ? "start" : "goal";
}

curation::WindowRole parse_window_role(std::string_view text) {
  if (text == "start") return curation::WindowRole::Start;
  if (text == "goal") return curation::WindowRole::Goal;
  fail(ErrorCode::Parse, "unknown window role '" + std::string(text) + "'");
}

EndpointKey start_key(const curation::CuratedSample& sample) {
  return {sample.video_id, sample.first_segment, curation::WindowRole::Start};
}

EndpointKey goal_key(const curation::CuratedSample& sample) {
  return {sample.video_id, sample.first_segment + sample.horizon() - 1, curation::WindowRole::Goal};
}

namespace {

json key_json(const EndpointKey& key) {
  return {{"video_id", key.video_id}, {"segment", key.segment}, {"role", to_string(key.role)}};
}

EndpointKey key_from(const json& j) {
  return {j.at("video_id").get<std::string>(), j.at("segment").get<int>(),
          parse_window_role(j.at("role").get<std::string>())};
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

void save_captions(const std::filesystem::path& path, const CaptionTable& table) {
  auto out = open_out(path);
  for (const auto& [key, captions] : table) {
    json j = key_json(key);
    json list = json::array();
    for (const auto& c : captions) list.push_back({{"tokens", c.tokens}, {"nll", c.nll}});
    j["captions"] = std::move(list);
    out << j.dump() << '\n';
  }
}

CaptionTable load_captions(const std::filesystem::path& path) {
  CaptionTable table;
  for_each_line(path, [&](const json& j) {
    std::vector<predict::ScoredCaption> captions;
    for (const auto& c : j.at("captions")) {
      captions.push_back({c.at("tokens").get<core::Tokens>(), c.at("nll").get<double>()});
    }
    table[key_from(j)] = std::move(captions);
  });
  return table;
}

void save_predictions(const std::filesystem::path& path, const PredictionTable& table) {
  auto out = open_out(path);
  for (const auto& [key, p] : table) {
    json j = key_json(key);
    j["action"] = p.action ? json(*p.action) : json(nullptr);
    j["score"] = p.best_score;
    j["caption"] = p.matched_caption ? json(*p.matched_caption) : json(nullptr);
    j["randomized"] = p.randomized;
    out << j.dump() << '\n';
  }
}

PredictionTable load_predictions(const std::filesystem::path& path) {
  PredictionTable table;
  for_each_line(path, [&](const json& j) {
    predict::Prediction p;
    if (!j.at("action").is_null()) p.action = j.at("action").get<int>();
    p.best_score = j.at("score").get<double>();
    if (!j.at("caption").is_null()) p.matched_caption = j.at("caption").get<int>();
    p.randomized = j.at("randomized").get<bool>();
    table[key_from(j)] = p;
  });
  return table;
}

void save_plans(const std::filesystem::path& path, const std::vector<PlanRecord>& plans) {
  auto out = open_out(path);
  for (const auto& p : plans) {
    json j = {{"video_id", p.video_id},
              {"first_segment", p.first_segment},
              {"ground_truth", p.ground_truth},
              {"predicted", p.predicted}};
    out << j.dump() << '\n';
  }
}

std::vector<PlanRecord> load_plans(const std::filesystem::path& path) {
  std::vector<PlanRecord> plans;
  for_each_line(path, [&](const json& j) {
    plans.push_back({j.at("video_id").get<std::string>(), j.at("first_segment").get<int>(),
                     j.at("ground_truth").get<metrics::Plan>(), j.at("predicted").get<metrics::Plan>()});
  });
  return plans;
}

bool VideoSplit::is_test(const std::string& video_id) const {
  return std::find(test.begin(), test.end(), video_id) != test.end();
}

void save_split(const std::filesystem::path& path, const VideoSplit& split) {
  auto out = open_out(path);
  for (const auto& v : split.train) out << v << "\ttrain\n";
  for (const auto& v : split.test) out << v << "\ttest\n";
}

VideoSplit load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot open " + path.string());
  VideoSplit split;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos, ErrorCode::Parse, path.string() + ": malformed line '" + line + "'");
    const auto part = line.substr(tab + 1);
    if (part == "train") {
      split.train.push_back(line.substr(0, tab));
    } else if (part == "test") {
      split.test.push_back(line.substr(0, tab));
    } else {
      fail(ErrorCode::Parse, path.string() + ": unknown split '" + part + "'");
    }
  }
  return split;
}

}  // namespace lap::pipeline
