#include "lap.h"

#include <cstring>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "core/corpus.hpp"
#include "metrics/metrics.hpp"
#include "pipeline/config.hpp"
#include "pipeline/pipeline.hpp"
#include "predict/rouge.hpp"

struct lap_config {
  lap::pipeline::ConfigTree tree;
};

struct lap_corpus {
  lap::core::Corpus corpus;
};

struct lap_report {
  std::vector<std::string> variants;
  std::vector<lap::metrics::HorizonReport> rows;
};

namespace {

thread_local std::string g_last_error;

lap_status to_status(lap::ErrorCode code) { return static_cast<lap_status>(static_cast<int>(code)); }

template <typename Fn>
lap_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LAP_OK;
  } catch (const lap::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LAP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LAP_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  lap::require(p != nullptr, lap::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

void copy_out(const std::string& text, char* buffer, size_t size, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (buffer && size >= text.size() + 1) {
    std::memcpy(buffer, text.c_str(), text.size() + 1);
  } else if (buffer || !needed) {
    lap::fail(lap::ErrorCode::InvalidArgument,
              "buffer too small: need " + std::to_string(text.size() + 1) + " bytes");
  }
}

lap::metrics::EvalReport as_eval(const lap_report& r) { return {r.rows}; }

const char* kStageNames[] = {"gen-data", "curate", "train-captioner", "caption",
                             "predict-actions", "train-planner", "plan", "evaluate"};

}  // namespace

extern "C" {

const char* lap_version(void) { return "0.1.0"; }

const char* lap_status_string(lap_status status) {
  switch (status) {
    case LAP_OK: return "ok";
    case LAP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LAP_ERR_VALIDATION: return "validation error";
    case LAP_ERR_COVERAGE: return "coverage error";
    case LAP_ERR_DUPLICATE: return "duplicate entry";
    case LAP_ERR_IO: return "i/o error";
    case LAP_ERR_PARSE: return "parse error";
    case LAP_ERR_NUMERIC: return "numeric error";
    case LAP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lap_last_error(void) { return g_last_error.c_str(); }

lap_status lap_config_create(lap_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new lap_config{lap::pipeline::default_config_tree()};
  });
}

lap_status lap_config_load(const char* path, lap_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new lap_config{lap::pipeline::read_config_tree(path)};
  });
}

lap_status lap_config_set(lap_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    lap::pipeline::set_config_value(config->tree, key, value);
  });
}

lap_status lap_config_get(const lap_config* config, const char* key, char* buffer, size_t size, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    const auto value = config->tree.get_optional<std::string>(key);
    lap::require(value.has_value(), lap::ErrorCode::InvalidArgument, std::string("unknown config key '") + key + "'");
    copy_out(*value, buffer, size, needed);
  });
}

lap_status lap_config_save(const lap_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    lap::pipeline::write_config_tree(path, config->tree);
  });
}

lap_status lap_config_render(const lap_config* config, char* buffer, size_t size, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    copy_out(lap::pipeline::render_config(config->tree), buffer, size, needed);
  });
}

lap_status lap_config_validate(const lap_config* config) {
  return guarded([&] {
    need(config, "config");
    (void)lap::pipeline::parse_config(config->tree);
  });
}

void lap_config_destroy(lap_config* config) { delete config; }

lap_status lap_corpus_generate(const lap_config* config, lap_corpus** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    const auto parsed = lap::pipeline::parse_config(config->tree);
    *out = new lap_corpus{lap::pipeline::build_corpus(parsed)};
  });
}

lap_status lap_corpus_load(const char* dir, lap_corpus** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new lap_corpus{lap::core::load_corpus_dir(dir)};
  });
}

lap_status lap_corpus_save(const lap_corpus* corpus, const char* dir) {
  return guarded([&] {
    need(corpus, "corpus");
    need(dir, "dir");
    lap::core::save_corpus_dir(dir, corpus->corpus);
  });
}

lap_status lap_corpus_info_get(const lap_corpus* corpus, lap_corpus_info* out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(out, "out");
    const auto& c = corpus->corpus;
    out->num_videos = c.videos.size();
    out->num_segments = 0;
    for (const auto& v : c.videos) out->num_segments += v.segments.size();
    out->num_actions = c.vocab.num_actions();
    out->num_tasks = c.vocab.num_tasks();
    out->feature_dim = c.feature_dim;
  });
}

void lap_corpus_destroy(lap_corpus* corpus) { delete corpus; }

const char* lap_stage_name(lap_stage stage) {
  const int i = static_cast<int>(stage);
  return i >= 0 && i < 8 ? kStageNames[i] : "unknown";
}

lap_status lap_run_stage(const lap_config* config, lap_stage stage) {
  return guarded([&] {
    namespace lp = lap::pipeline;
    need(config, "config");
    const int index = static_cast<int>(stage);
    lap::require(index >= 0 && index < 8, lap::ErrorCode::InvalidArgument, "unknown stage");
    const auto parsed = lp::parse_config(config->tree);
    const lp::Workspace ws{parsed.output_dir};
    std::filesystem::create_directories(ws.root);
    // Later stages resolve their settings from the workspace copy.
    lp::write_config_tree(ws.config(), config->tree);
    lp::run_stage(kStageNames[index], nullptr, [&] {
      switch (stage) {
        case LAP_STAGE_GEN_DATA: lp::stage_gen_data(parsed, ws, nullptr); break;
        case LAP_STAGE_CURATE: lp::stage_curate(parsed, ws, nullptr); break;
        case LAP_STAGE_TRAIN_CAPTIONER: lp::stage_train_captioner(parsed, ws, nullptr); break;
        case LAP_STAGE_CAPTION: lp::stage_caption(parsed, ws, nullptr); break;
        case LAP_STAGE_PREDICT_ACTIONS: lp::stage_predict(parsed, ws, nullptr); break;
        case LAP_STAGE_TRAIN_PLANNER: lp::stage_train_planner(parsed, ws, nullptr); break;
        case LAP_STAGE_PLAN: lp::stage_plan(parsed, ws, nullptr); break;
        case LAP_STAGE_EVALUATE: lp::stage_evaluate(parsed, ws, nullptr); break;
      }
    });
  });
}

lap_status lap_run_pipeline(const lap_config* config, lap_report** out) {
  return guarded([&] {
    need(config, "config");
    auto result = lap::pipeline::run_pipeline(config->tree);
    if (out) {
      auto* r = new lap_report;
      r->rows = result.report.horizons;
      r->variants.assign(r->rows.size(), "");
      *out = r;
    }
  });
}

lap_status lap_evaluate(const lap_config* config, lap_report** out) {
  return guarded([&] {
    namespace lp = lap::pipeline;
    need(config, "config");
    const auto parsed = lp::parse_config(config->tree);
    const auto report =
        lp::run_stage("evaluate", nullptr, [&] { return lp::stage_evaluate(parsed, lp::Workspace{parsed.output_dir}, nullptr); });
    if (out) {
      auto* r = new lap_report;
      r->rows = report.horizons;
      r->variants.assign(r->rows.size(), "");
      *out = r;
    }
  });
}

lap_status lap_run_ablation(const lap_config* config, const char* name, lap_report** out) {
  return guarded([&] {
    need(config, "config");
    need(name, "name");
    const auto rows = lap::pipeline::run_ablation(name, config->tree);
    if (out) {
      auto* r = new lap_report;
      for (const auto& row : rows) {
        r->variants.push_back(row.variant);
        r->rows.push_back(row.result);
      }
      *out = r;
    }
  });
}

size_t lap_ablation_count(void) { return lap::pipeline::ablation_names().size(); }

const char* lap_ablation_name(size_t index) {
  const auto& names = lap::pipeline::ablation_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

lap_status lap_project_latent(const lap_config* config, double* silhouette_text, double* silhouette_visual) {
  return guarded([&] {
    namespace lp = lap::pipeline;
    need(config, "config");
    const auto parsed = lp::parse_config(config->tree);
    const auto [t, v] =
        lp::run_stage("project-latent", nullptr, [&] { return lp::project_latent_stage(parsed, lp::Workspace{parsed.output_dir}); });
    if (silhouette_text) *silhouette_text = t;
    if (silhouette_visual) *silhouette_visual = v;
  });
}

size_t lap_report_size(const lap_report* report) { return report ? report->rows.size() : 0; }

lap_status lap_report_get(const lap_report* report, size_t index, lap_report_row* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    lap::require(index < report->rows.size(), lap::ErrorCode::InvalidArgument, "row index out of range");
    const auto& h = report->rows[index];
    *out = {report->variants[index].c_str(), h.horizon, h.success_rate, h.mean_accuracy, h.mean_siou, h.samples};
  });
}

lap_status lap_report_csv(const lap_report* report, char* buffer, size_t size, size_t* needed) {
  return guarded([&] {
    need(report, "report");
    bool ablation = false;
    for (const auto& v : report->variants) ablation = ablation || !v.empty();
    if (ablation) {
      std::vector<lap::pipeline::AblationRow> rows;
      for (size_t i = 0; i < report->rows.size(); ++i) rows.push_back({report->variants[i], report->rows[i]});
      copy_out(lap::pipeline::ablation_csv(rows), buffer, size, needed);
    } else {
      copy_out(lap::metrics::to_csv(as_eval(*report)), buffer, size, needed);
    }
  });
}

lap_status lap_report_table(const lap_report* report, char* buffer, size_t size, size_t* needed) {
  return guarded([&] {
    need(report, "report");
    std::string text;
    bool ablation = false;
    for (const auto& v : report->variants) ablation = ablation || !v.empty();
    if (!ablation) {
      text = lap::metrics::to_table(as_eval(*report));
    } else {
      char line[160];
      std::snprintf(line, sizeof(line), "%-20s %-8s %8s %8s %8s %10s\n", "variant", "horizon", "SR", "mAcc", "mSIoU",
                    "n_samples");
      text += line;
      for (size_t i = 0; i < report->rows.size(); ++i) {
        const auto& h = report->rows[i];
        std::snprintf(line, sizeof(line), "%-20s %-8d %8s %8s %8s %10d\n", report->variants[i].c_str(), h.horizon,
                      lap::metrics::format_percent(h.success_rate).c_str(),
                      lap::metrics::format_percent(h.mean_accuracy).c_str(),
                      lap::metrics::format_percent(h.mean_siou).c_str(), h.samples);
        text += line;
      }
    }
    copy_out(text, buffer, size, needed);
  });
}

void lap_report_destroy(lap_report* report) { delete report; }

lap_status lap_metrics(const int* preds, const int* gts, size_t count, size_t horizon, double* success_rate,
                       double* mean_accuracy, double* mean_siou) {
  return guarded([&] {
    lap::require(count > 0 && horizon > 0, lap::ErrorCode::InvalidArgument, "empty plan set");
    need(preds, "preds");
    need(gts, "gts");
    std::vector<lap::metrics::Plan> p, g;
    for (size_t i = 0; i < count; ++i) {
      p.emplace_back(preds + i * horizon, preds + (i + 1) * horizon);
      g.emplace_back(gts + i * horizon, gts + (i + 1) * horizon);
    }
    if (success_rate) *success_rate = lap::metrics::success_rate(p, g);
    if (mean_accuracy) *mean_accuracy = lap::metrics::mean_accuracy(p, g);
    if (mean_siou) *mean_siou = lap::metrics::mean_siou(p, g);
  });
}

lap_status lap_rouge(const char* candidate, const char* reference, int n, const char* variant, double* score) {
  return guarded([&] {
    need(candidate, "candidate");
    need(reference, "reference");
    need(score, "score");
    lap::require(n == 1 || n == 2, lap::ErrorCode::InvalidArgument, "n must be 1 or 2");
    const auto v = lap::predict::parse_rouge_variant(variant ? variant : "f1");
    *score = lap::predict::rouge_n(lap::core::tokenize(candidate), lap::core::tokenize(reference), n, v);
  });
}

}  // extern "C"
