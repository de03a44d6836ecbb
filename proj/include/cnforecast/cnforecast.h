/*
 * C interface to the cnforecast library.
 *
 * Objects are opaque handles created by cnf_*_create / _load / _train calls
 * and released with the matching _free call. Every fallible call returns a
 * cnf_status; on failure a message for the calling thread is available from
 * cnf_last_error() until the next failing call on that thread.
 */
#ifndef CNFORECAST_H
#define CNFORECAST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CNF_BUILDING_LIBRARY)
#    define CNF_API __declspec(dllexport)
#  else
#    define CNF_API __declspec(dllimport)
#  endif
#else
#  define CNF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cnf_status {
  CNF_OK = 0,
  CNF_E_CONTRACT = 1,          /* invalid argument or dimension mismatch */
  CNF_E_CONFIG = 2,            /* invalid configuration */
  CNF_E_PARSE = 3,             /* malformed CSV input */
  CNF_E_IO = 4,                /* file could not be read or written */
  CNF_E_RANGE = 5,             /* contextual number outside [1, K] */
  CNF_E_INTEGRITY = 6,         /* model file failed validation */
  CNF_E_INSUFFICIENT_DATA = 7, /* too few observations */
  CNF_E_DEGENERATE = 8,        /* zero-norm reference vector */
  CNF_E_NUMERIC = 9,           /* numerical failure, e.g. every search trial failed */
  CNF_E_INTERNAL = 10          /* unexpected failure (allocation, ...) */
} cnf_status;

typedef enum cnf_init_mode { CNF_INIT_LINEAR = 0, CNF_INIT_RANDOM_SAMPLE = 1 } cnf_init_mode;
typedef enum cnf_encode_mode { CNF_ENCODE_ARGMAX = 0, CNF_ENCODE_WEIGHTED = 1 } cnf_encode_mode;
typedef enum cnf_normalization { CNF_NORM_NONE = 0, CNF_NORM_ZSCORE = 1 } cnf_normalization;
typedef enum cnf_model_kind { CNF_MODEL_SOM = 0, CNF_MODEL_PIPELINE = 1 } cnf_model_kind;
typedef enum cnf_eval_mode { CNF_EVAL_TEACHER_FORCING = 0, CNF_EVAL_FREE_RUNNING = 1 } cnf_eval_mode;

typedef struct cnf_dataset cnf_dataset;
typedef struct cnf_som cnf_som;
typedef struct cnf_pipeline cnf_pipeline;
typedef struct cnf_report cnf_report;
typedef struct cnf_search cnf_search;

typedef struct cnf_som_config {
  size_t nodes;
  size_t epochs;
  double radius_start;
  double radius_end;
  uint64_t seed;
  cnf_init_mode init;
} cnf_som_config;

typedef struct cnf_pipeline_config {
  size_t nodes;
  size_t lag;
  cnf_encode_mode mode;
  size_t g;
  double beta; /* <= 0 derives beta from the training data */
  uint64_t seed;
  cnf_normalization normalization;
} cnf_pipeline_config;

typedef struct cnf_search_spec {
  size_t draws;
  size_t nodes_min;
  size_t nodes_max;
  size_t lag_min;
  size_t lag_max;
  uint64_t seed;
  double validation_fraction;
  size_t threads;
} cnf_search_spec;

CNF_API const char* cnf_last_error(void);
CNF_API const char* cnf_status_name(cnf_status status);

/* ---- datasets ---------------------------------------------------------- */

CNF_API cnf_status cnf_dataset_create(const double* values, size_t rows, size_t cols, cnf_dataset** out);
CNF_API cnf_status cnf_dataset_load_csv(const char* path, cnf_dataset** out);
/* header may be NULL; otherwise it is written as a leading '#' line. */
CNF_API cnf_status cnf_dataset_save_csv(const cnf_dataset* data, const char* path, const char* header);
CNF_API cnf_status cnf_dataset_to_csv_string(const cnf_dataset* data, const char* header, char** out);
CNF_API void cnf_string_free(char* text);
CNF_API size_t cnf_dataset_rows(const cnf_dataset* data);
CNF_API size_t cnf_dataset_cols(const cnf_dataset* data);
CNF_API const double* cnf_dataset_values(const cnf_dataset* data);
CNF_API cnf_status cnf_dataset_split(const cnf_dataset* data, size_t train_count, cnf_dataset** train,
                                     cnf_dataset** test);
/* Rows [first, last). */
CNF_API cnf_status cnf_dataset_slice(const cnf_dataset* data, size_t first, size_t last, cnf_dataset** out);
CNF_API void cnf_dataset_free(cnf_dataset* data);

CNF_API cnf_status cnf_synth_uniform_1d(size_t count, double low, double high, uint64_t seed, cnf_dataset** out);
CNF_API cnf_status cnf_synth_traveling_wave(size_t rows, size_t cols, size_t steps, double speed, double noise_sd,
                                            uint64_t seed, cnf_dataset** out);

/* ---- model files ------------------------------------------------------- */

CNF_API cnf_status cnf_model_kind_of(const char* path, cnf_model_kind* kind);

/* ---- self-organizing maps --------------------------------------------- */

/* Fills the default schedule for `nodes` nodes trained on `rows` observations. */
CNF_API cnf_status cnf_som_config_default(size_t nodes, size_t rows, uint64_t seed, cnf_som_config* cfg);
CNF_API cnf_status cnf_som_train(const cnf_dataset* data, const cnf_som_config* cfg, cnf_som** out);
CNF_API cnf_status cnf_som_load(const char* path, cnf_som** out);
CNF_API cnf_status cnf_som_save(const cnf_som* som, const char* path);
CNF_API size_t cnf_som_nodes(const cnf_som* som);
CNF_API size_t cnf_som_dim(const cnf_som* som);
CNF_API cnf_status cnf_som_weights(const cnf_som* som, cnf_dataset** out);
CNF_API cnf_status cnf_som_quantization_error(const cnf_som* som, const cnf_dataset* data, double* out);
CNF_API cnf_status cnf_som_ordering_score(const cnf_som* som, size_t sample_size, uint64_t seed, double* out);
CNF_API cnf_status cnf_som_pairwise_distances(const cnf_som* som, cnf_dataset** out);
CNF_API cnf_status cnf_som_default_beta(const cnf_som* som, const cnf_dataset* data, double* out);
/* cn_out and pmax_out hold rows(data) entries each; either may be NULL. */
CNF_API cnf_status cnf_som_encode(const cnf_som* som, const cnf_dataset* data, cnf_encode_mode mode, size_t g,
                                  double beta, double* cn_out, double* pmax_out);
/* On CNF_E_RANGE, *bad_index (if non-NULL) receives the offending position. */
CNF_API cnf_status cnf_som_decode(const cnf_som* som, const double* cns, size_t count, cnf_dataset** out,
                                  size_t* bad_index);
CNF_API void cnf_som_free(cnf_som* som);

/* ---- pipelines --------------------------------------------------------- */

CNF_API void cnf_pipeline_config_default(size_t nodes, size_t lag, cnf_pipeline_config* cfg);
CNF_API cnf_status cnf_pipeline_train(const cnf_dataset* data, const cnf_pipeline_config* cfg, cnf_pipeline** out);
CNF_API cnf_status cnf_pipeline_load(const char* path, cnf_pipeline** out);
CNF_API cnf_status cnf_pipeline_save(const cnf_pipeline* p, const char* path);
CNF_API size_t cnf_pipeline_nodes(const cnf_pipeline* p);
CNF_API size_t cnf_pipeline_lag(const cnf_pipeline* p);
CNF_API size_t cnf_pipeline_dim(const cnf_pipeline* p);
CNF_API double cnf_pipeline_beta(const cnf_pipeline* p);
CNF_API double cnf_pipeline_baseline_pmax(const cnf_pipeline* p);
/* Borrowed view of the pipeline's map (valid while the pipeline lives). */
CNF_API const cnf_som* cnf_pipeline_som(const cnf_pipeline* p);
/* Inputs are in original (un-normalized) units. */
CNF_API cnf_status cnf_pipeline_encode(const cnf_pipeline* p, const cnf_dataset* data, double* cn_out,
                                       double* pmax_out);
CNF_API cnf_status cnf_pipeline_decode(const cnf_pipeline* p, const double* cns, size_t count, cnf_dataset** out,
                                       size_t* bad_index);
/* `recent` holds exactly lag observations, oldest first. */
CNF_API cnf_status cnf_pipeline_forecast(const cnf_pipeline* p, const cnf_dataset* recent, size_t horizon,
                                         cnf_dataset** out, size_t* clamped);
CNF_API cnf_status cnf_pipeline_evaluate(const cnf_pipeline* p, const cnf_dataset* test, const cnf_dataset* warmup,
                                         cnf_eval_mode mode, cnf_report** out);
CNF_API void cnf_pipeline_free(cnf_pipeline* p);

/* ---- evaluation reports ------------------------------------------------ */

CNF_API cnf_status cnf_persistence_baseline(const cnf_dataset* test, const double* last_train_row, size_t dim,
                                            cnf_report** out);
CNF_API size_t cnf_report_steps(const cnf_report* r);
CNF_API double cnf_report_error(const cnf_report* r, size_t t);
CNF_API int cnf_report_valid(const cnf_report* r, size_t t);
/* NaN when the report carries no p_max series (baselines). */
CNF_API double cnf_report_pmax(const cnf_report* r, size_t t);
CNF_API double cnf_report_mean_error(const cnf_report* r);
CNF_API size_t cnf_report_excluded(const cnf_report* r);
CNF_API size_t cnf_report_clamped(const cnf_report* r);
CNF_API void cnf_report_free(cnf_report* r);

/* ---- hyperparameter search -------------------------------------------- */

CNF_API void cnf_search_spec_default(cnf_search_spec* spec);
/* `base` supplies encode mode, g, beta, seed and normalization. */
CNF_API cnf_status cnf_search_run(const cnf_dataset* train, const cnf_search_spec* spec,
                                  const cnf_pipeline_config* base, cnf_search** out);
CNF_API size_t cnf_search_trials(const cnf_search* s);
CNF_API cnf_status cnf_search_trial(const cnf_search* s, size_t index, size_t* nodes, size_t* lag,
                                    double* validation_error, int* ok);
CNF_API size_t cnf_search_best_index(const cnf_search* s);
/* Retrains the winning (K, d) on the full training set. */
CNF_API cnf_status cnf_search_refit(const cnf_search* s, cnf_pipeline** out);
CNF_API void cnf_search_free(cnf_search* s);

#ifdef __cplusplus
}
#endif

#endif /* CNFORECAST_H */
