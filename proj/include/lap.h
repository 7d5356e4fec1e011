/* Language-aided procedure planning: C interface.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_destroy function. Every fallible call returns a lap_status;
 * on failure lap_last_error() describes the problem (per thread).
 * Strings are copied out with the (buffer, size, needed) convention: the
 * call stores the required size including the terminator in *needed and
 * copies when the buffer is large enough.
 */
#ifndef LAP_H
#define LAP_H

#include <stddef.h>

#if defined(LAP_BUILDING_LIBRARY)
#define LAP_API __attribute__((visibility("default")))
#else
#define LAP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lap_status {
  LAP_OK = 0,
  LAP_ERR_INVALID_ARGUMENT = 1,
  LAP_ERR_VALIDATION = 2,
  LAP_ERR_COVERAGE = 3,
  LAP_ERR_DUPLICATE = 4,
  LAP_ERR_IO = 5,
  LAP_ERR_PARSE = 6,
  LAP_ERR_NUMERIC = 7,
  LAP_ERR_INTERNAL = 8
} lap_status;

typedef enum lap_stage {
  LAP_STAGE_GEN_DATA = 0,
  LAP_STAGE_CURATE,
  LAP_STAGE_TRAIN_CAPTIONER,
  LAP_STAGE_CAPTION,
  LAP_STAGE_PREDICT_ACTIONS,
  LAP_STAGE_TRAIN_PLANNER,
  LAP_STAGE_PLAN,
  LAP_STAGE_EVALUATE
} lap_stage;

typedef struct lap_config lap_config;
typedef struct lap_corpus lap_corpus;
typedef struct lap_report lap_report;

typedef struct lap_report_row {
  const char* variant; /* "" outside ablations; valid while the report lives */
  int horizon;
  double success_rate; /* fractions in [0, 1] */
  double mean_accuracy;
  double mean_siou;
  int samples;
} lap_report_row;

typedef struct lap_corpus_info {
  size_t num_videos;
  size_t num_segments;
  int num_actions;
  int num_tasks;
  int feature_dim;
} lap_corpus_info;

LAP_API const char* lap_version(void);
LAP_API const char* lap_status_string(lap_status status);
LAP_API const char* lap_last_error(void);

/* Configuration: sectioned key = value file; keys are "section.key". */
LAP_API lap_status lap_config_create(lap_config** out);
LAP_API lap_status lap_config_load(const char* path, lap_config** out);
LAP_API lap_status lap_config_set(lap_config* config, const char* key, const char* value);
LAP_API lap_status lap_config_get(const lap_config* config, const char* key, char* buffer, size_t size,
                                  size_t* needed);
LAP_API lap_status lap_config_save(const lap_config* config, const char* path);
LAP_API lap_status lap_config_render(const lap_config* config, char* buffer, size_t size, size_t* needed);
/* Parses and validates without running anything. */
LAP_API lap_status lap_config_validate(const lap_config* config);
LAP_API void lap_config_destroy(lap_config* config);

/* Corpus built from the config (synthetic or loaded). */
LAP_API lap_status lap_corpus_generate(const lap_config* config, lap_corpus** out);
LAP_API lap_status lap_corpus_load(const char* dir, lap_corpus** out);
LAP_API lap_status lap_corpus_save(const lap_corpus* corpus, const char* dir);
LAP_API lap_status lap_corpus_info_get(const lap_corpus* corpus, lap_corpus_info* out);
LAP_API void lap_corpus_destroy(lap_corpus* corpus);

/* One pipeline stage in the config's output directory. */
LAP_API lap_status lap_run_stage(const lap_config* config, lap_stage stage);
LAP_API const char* lap_stage_name(lap_stage stage);
/* All stages; *out receives the evaluation report. */
LAP_API lap_status lap_run_pipeline(const lap_config* config, lap_report** out);
/* Evaluation stage alone, on existing plans. */
LAP_API lap_status lap_evaluate(const lap_config* config, lap_report** out);
LAP_API lap_status lap_run_ablation(const lap_config* config, const char* name, lap_report** out);
/* Number of ablation names; lap_ablation_name(i) for each. */
LAP_API size_t lap_ablation_count(void);
LAP_API const char* lap_ablation_name(size_t index);
/* Writes the latent CSV/SVG files; silhouettes of the text and visual projections. */
LAP_API lap_status lap_project_latent(const lap_config* config, double* silhouette_text, double* silhouette_visual);

LAP_API size_t lap_report_size(const lap_report* report);
LAP_API lap_status lap_report_get(const lap_report* report, size_t index, lap_report_row* out);
/* CSV with percentages to two decimals. */
LAP_API lap_status lap_report_csv(const lap_report* report, char* buffer, size_t size, size_t* needed);
LAP_API lap_status lap_report_table(const lap_report* report, char* buffer, size_t size, size_t* needed);
LAP_API void lap_report_destroy(lap_report* report);

/* preds and gts hold `count` plans of `horizon` ids each, row-major. */
LAP_API lap_status lap_metrics(const int* preds, const int* gts, size_t count, size_t horizon,
                               double* success_rate, double* mean_accuracy, double* mean_siou);
/* Whitespace-tokenised ROUGE-n (n = 1 or 2); variant is precision, recall or f1. */
LAP_API lap_status lap_rouge(const char* candidate, const char* reference, int n, const char* variant,
                             double* score);

#ifdef __cplusplus
}
#endif

#endif /* LAP_H */
