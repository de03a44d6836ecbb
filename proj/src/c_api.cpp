#include "cnforecast/cnforecast.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <optional>
#include <string>

#include "cnforecast/data_io.hpp"
#include "cnforecast/encoder.hpp"
#include "cnforecast/forecast.hpp"
#include "cnforecast/model_file.hpp"
#include "cnforecast/som.hpp"

struct cnf_dataset {
  cnf::Dataset data;
};

struct cnf_som {
  cnf::SomModel model;
};

struct cnf_pipeline {
  cnf::CnPipeline pipeline;
  cnf_som som_view;
};

struct cnf_report {
  cnf::EvalReport report;
};

struct cnf_search {
  cnf::SearchResult result;
  cnf::Dataset train;
  cnf::PipelineConfig base;
};

namespace {

thread_local std::string g_last_error;

cnf_status status_for(cnf::ErrorKind kind) {
  using cnf::ErrorKind;
  switch (kind) {
    case ErrorKind::contract: return CNF_E_CONTRACT;
    case ErrorKind::config: return CNF_E_CONFIG;
    case ErrorKind::parse: return CNF_E_PARSE;
    case ErrorKind::io: return CNF_E_IO;
    case ErrorKind::range: return CNF_E_RANGE;
    case ErrorKind::integrity: return CNF_E_INTEGRITY;
    case ErrorKind::insufficient_data: return CNF_E_INSUFFICIENT_DATA;
    case ErrorKind::degenerate: return CNF_E_DEGENERATE;
    case ErrorKind::numeric: return CNF_E_NUMERIC;
  }
  return CNF_E_INTERNAL;
}

template <class F>
cnf_status guarded(F&& body) noexcept {
  try {
    body();
    return CNF_OK;
  } catch (const cnf::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CNF_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CNF_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return CNF_E_INTERNAL;
  }
}

template <class... Ptrs>
void need(Ptrs... ptrs) {
  if (((ptrs == nullptr) || ...)) cnf::fail(cnf::ErrorKind::contract, "null argument");
}

cnf::PipelineConfig to_cpp(const cnf_pipeline_config& c) {
  cnf::PipelineConfig cfg;
  cfg.nodes = c.nodes;
  cfg.lag = c.lag;
  cfg.mode = c.mode == CNF_ENCODE_WEIGHTED ? cnf::EncodeMode::weighted : cnf::EncodeMode::argmax;
  cfg.g = c.g;
  if (c.beta > 0.0) cfg.beta = c.beta;
  cfg.seed = c.seed;
  cfg.normalization = c.normalization == CNF_NORM_NONE ? cnf::NormalizationMode::none : cnf::NormalizationMode::zscore;
  return cfg;
}

cnf_dataset* wrap(cnf::Dataset d) { return new cnf_dataset{std::move(d)}; }

std::vector<double> decode_all(const cnf::SomModel& som, const cnf::CnPipeline* pipeline, const double* cns,
                               std::size_t count, std::size_t* bad_index, std::size_t& dim) {
  dim = som.dim();
  std::vector<double> out;
  out.reserve(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    try {
      const auto row = pipeline ? cnf::pipeline_decode(*pipeline, {cns[i]}) : cnf::decode(som, {cns[i]});
      out.insert(out.end(), row.begin(), row.end());
    } catch (const cnf::Error& e) {
      if (bad_index) *bad_index = i;
      cnf::fail(e.kind(), "entry " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

extern "C" {

const char* cnf_last_error(void) { return g_last_error.c_str(); }

const char* cnf_status_name(cnf_status status) {
  switch (status) {
    case CNF_OK: return "ok";
    case CNF_E_CONTRACT: return "contract violation";
    case CNF_E_CONFIG: return "configuration error";
    case CNF_E_PARSE: return "parse error";
    case CNF_E_IO: return "I/O error";
    case CNF_E_RANGE: return "range error";
    case CNF_E_INTEGRITY: return "integrity error";
    case CNF_E_INSUFFICIENT_DATA: return "insufficient data";
    case CNF_E_DEGENERATE: return "degenerate reference";
    case CNF_E_NUMERIC: return "numeric failure";
    case CNF_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

/* ---- datasets ---- */

cnf_status cnf_dataset_create(const double* values, size_t rows, size_t cols, cnf_dataset** out) {
  return guarded([&] {
    need(values, out);
    std::vector<double> v(values, values + rows * cols);
    *out = wrap(cnf::Dataset(cnf::Matrix(rows, cols, std::move(v))));
  });
}

cnf_status cnf_dataset_load_csv(const char* path, cnf_dataset** out) {
  return guarded([&] {
    need(path, out);
    *out = wrap(cnf::load_matrix(path));
  });
}

cnf_status cnf_dataset_save_csv(const cnf_dataset* data, const char* path, const char* header) {
  return guarded([&] {
    need(data, path);
    cnf::save_matrix(data->data, path, header ? std::string_view(header) : std::string_view{});
  });
}

cnf_status cnf_dataset_to_csv_string(const cnf_dataset* data, const char* header, char** out) {
  return guarded([&] {
    need(data, out);
    const std::string text =
        cnf::format_matrix(data->data.matrix(), header ? std::string_view(header) : std::string_view{});
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

void cnf_string_free(char* text) { delete[] text; }

size_t cnf_dataset_rows(const cnf_dataset* data) { return data ? data->data.size() : 0; }
size_t cnf_dataset_cols(const cnf_dataset* data) { return data ? data->data.dim() : 0; }
const double* cnf_dataset_values(const cnf_dataset* data) {
  return data ? data->data.matrix().values().data() : nullptr;
}

cnf_status cnf_dataset_split(const cnf_dataset* data, size_t train_count, cnf_dataset** train, cnf_dataset** test) {
  return guarded([&] {
    need(data, train, test);
    auto [a, b] = cnf::split_prefix(data->data, {train_count});
    *train = wrap(std::move(a));
    *test = wrap(std::move(b));
  });
}

cnf_status cnf_dataset_slice(const cnf_dataset* data, size_t first, size_t last, cnf_dataset** out) {
  return guarded([&] {
    need(data, out);
    *out = wrap(cnf::slice_rows(data->data, first, last));
  });
}

void cnf_dataset_free(cnf_dataset* data) { delete data; }

cnf_status cnf_synth_uniform_1d(size_t count, double low, double high, uint64_t seed, cnf_dataset** out) {
  return guarded([&] {
    need(out);
    *out = wrap(cnf::synth_uniform_1d(count, low, high, seed));
  });
}

cnf_status cnf_synth_traveling_wave(size_t rows, size_t cols, size_t steps, double speed, double noise_sd,
                                    uint64_t seed, cnf_dataset** out) {
  return guarded([&] {
    need(out);
    *out = wrap(cnf::synth_traveling_wave(rows, cols, steps, speed, noise_sd, seed));
  });
}

/* ---- model files ---- */

cnf_status cnf_model_kind_of(const char* path, cnf_model_kind* kind) {
  return guarded([&] {
    need(path, kind);
    const auto file = cnf::load_model(path);
    *kind = file.kind() == cnf::ModelKind::som ? CNF_MODEL_SOM : CNF_MODEL_PIPELINE;
  });
}

/* ---- maps ---- */

cnf_status cnf_som_config_default(size_t nodes, size_t rows, uint64_t seed, cnf_som_config* cfg) {
  return guarded([&] {
    need(cfg);
    const auto c = cnf::default_train_config(nodes, rows, seed);
    *cfg = {c.nodes, c.epochs, c.radius_start, c.radius_end, c.seed, CNF_INIT_LINEAR};
  });
}

cnf_status cnf_som_train(const cnf_dataset* data, const cnf_som_config* cfg, cnf_som** out) {
  return guarded([&] {
    need(data, cfg, out);
    cnf::TrainConfig c;
    c.nodes = cfg->nodes;
    c.epochs = cfg->epochs;
    c.radius_start = cfg->radius_start;
    c.radius_end = cfg->radius_end;
    c.seed = cfg->seed;
    c.init = cfg->init == CNF_INIT_RANDOM_SAMPLE ? cnf::InitMode::random_sample : cnf::InitMode::linear;
    *out = new cnf_som{cnf::train(data->data, c)};
  });
}

cnf_status cnf_som_load(const char* path, cnf_som** out) {
  return guarded([&] {
    need(path, out);
    *out = new cnf_som{cnf::load_som(path)};
  });
}

cnf_status cnf_som_save(const cnf_som* som, const char* path) {
  return guarded([&] {
    need(som, path);
    cnf::save_model(som->model, path);
  });
}

size_t cnf_som_nodes(const cnf_som* som) { return som ? som->model.nodes() : 0; }
size_t cnf_som_dim(const cnf_som* som) { return som ? som->model.dim() : 0; }

cnf_status cnf_som_weights(const cnf_som* som, cnf_dataset** out) {
  return guarded([&] {
    need(som, out);
    *out = wrap(cnf::Dataset(som->model.weights()));
  });
}

cnf_status cnf_som_quantization_error(const cnf_som* som, const cnf_dataset* data, double* out) {
  return guarded([&] {
    need(som, data, out);
    *out = cnf::quantization_error(som->model, data->data);
  });
}

cnf_status cnf_som_ordering_score(const cnf_som* som, size_t sample_size, uint64_t seed, double* out) {
  return guarded([&] {
    need(som, out);
    *out = cnf::ordering_score(som->model, sample_size, seed);
  });
}

cnf_status cnf_som_pairwise_distances(const cnf_som* som, cnf_dataset** out) {
  return guarded([&] {
    need(som, out);
    *out = wrap(cnf::Dataset(cnf::pairwise_weight_distances(som->model)));
  });
}

cnf_status cnf_som_default_beta(const cnf_som* som, const cnf_dataset* data, double* out) {
  return guarded([&] {
    need(som, data, out);
    *out = cnf::default_beta(som->model, data->data);
  });
}

cnf_status cnf_som_encode(const cnf_som* som, const cnf_dataset* data, cnf_encode_mode mode, size_t g, double beta,
                          double* cn_out, double* pmax_out) {
  return guarded([&] {
    need(som, data);
    if (data->data.dim() != som->model.dim()) cnf::fail(cnf::ErrorKind::contract, "data dimension does not match the map");
    cnf::EncodeConfig cfg;
    cfg.mode = mode == CNF_ENCODE_WEIGHTED ? cnf::EncodeMode::weighted : cnf::EncodeMode::argmax;
    cfg.g = g;
    cfg.beta = beta;
    cnf::validate(cfg, som->model.nodes());
    for (std::size_t i = 0; i < data->data.size(); ++i) {
      const auto x = data->data.row(i);
      if (cn_out) cn_out[i] = cnf::encode(som->model, x, cfg).value;
      if (pmax_out) pmax_out[i] = cnf::p_max(som->model, x, cfg.beta);
    }
  });
}

cnf_status cnf_som_decode(const cnf_som* som, const double* cns, size_t count, cnf_dataset** out,
                          size_t* bad_index) {
  return guarded([&] {
    need(som, cns, out);
    std::size_t dim = 0;
    auto values = decode_all(som->model, nullptr, cns, count, bad_index, dim);
    *out = wrap(cnf::Dataset(cnf::Matrix(count, dim, std::move(values))));
  });
}

void cnf_som_free(cnf_som* som) { delete som; }

/* ---- pipelines ---- */

void cnf_pipeline_config_default(size_t nodes, size_t lag, cnf_pipeline_config* cfg) {
  if (!cfg) return;
  *cfg = {nodes, lag, CNF_ENCODE_ARGMAX, 3, 0.0, 42, CNF_NORM_ZSCORE};
}

namespace {
cnf_pipeline* wrap_pipeline(cnf::CnPipeline p) {
  auto som = p.som;
  return new cnf_pipeline{std::move(p), cnf_som{std::move(som)}};
}
}  // namespace

cnf_status cnf_pipeline_train(const cnf_dataset* data, const cnf_pipeline_config* cfg, cnf_pipeline** out) {
  return guarded([&] {
    need(data, cfg, out);
    *out = wrap_pipeline(cnf::pipeline_train(data->data, to_cpp(*cfg)));
  });
}

cnf_status cnf_pipeline_load(const char* path, cnf_pipeline** out) {
  return guarded([&] {
    need(path, out);
    *out = wrap_pipeline(cnf::load_pipeline(path));
  });
}

cnf_status cnf_pipeline_save(const cnf_pipeline* p, const char* path) {
  return guarded([&] {
    need(p, path);
    cnf::save_model(p->pipeline, path);
  });
}

size_t cnf_pipeline_nodes(const cnf_pipeline* p) { return p ? p->pipeline.nodes() : 0; }
size_t cnf_pipeline_lag(const cnf_pipeline* p) { return p ? p->pipeline.lag() : 0; }
size_t cnf_pipeline_dim(const cnf_pipeline* p) { return p ? p->pipeline.dim() : 0; }
double cnf_pipeline_beta(const cnf_pipeline* p) { return p ? p->pipeline.encode.beta : 0.0; }
double cnf_pipeline_baseline_pmax(const cnf_pipeline* p) { return p ? p->pipeline.baseline_pmax : 0.0; }
const cnf_som* cnf_pipeline_som(const cnf_pipeline* p) { return p ? &p->som_view : nullptr; }

cnf_status cnf_pipeline_encode(const cnf_pipeline* p, const cnf_dataset* data, double* cn_out, double* pmax_out) {
  return guarded([&] {
    need(p, data);
    if (data->data.dim() != p->pipeline.dim())
      cnf::fail(cnf::ErrorKind::contract, "data dimension does not match the pipeline");
    for (std::size_t i = 0; i < data->data.size(); ++i) {
      const auto x = data->data.row(i);
      if (cn_out) cn_out[i] = cnf::pipeline_encode(p->pipeline, x).value;
      if (pmax_out) pmax_out[i] = cnf::pipeline_p_max(p->pipeline, x);
    }
  });
}

cnf_status cnf_pipeline_decode(const cnf_pipeline* p, const double* cns, size_t count, cnf_dataset** out,
                               size_t* bad_index) {
  return guarded([&] {
    need(p, cns, out);
    std::size_t dim = 0;
    auto values = decode_all(p->pipeline.som, &p->pipeline, cns, count, bad_index, dim);
    *out = wrap(cnf::Dataset(cnf::Matrix(count, dim, std::move(values))));
  });
}

cnf_status cnf_pipeline_forecast(const cnf_pipeline* p, const cnf_dataset* recent, size_t horizon, cnf_dataset** out,
                                 size_t* clamped) {
  return guarded([&] {
    need(p, recent, out);
    auto result = cnf::pipeline_forecast(p->pipeline, recent->data.matrix(), horizon);
    if (clamped) *clamped = result.clamped;
    *out = wrap(cnf::Dataset(std::move(result.predictions)));
  });
}

cnf_status cnf_pipeline_evaluate(const cnf_pipeline* p, const cnf_dataset* test, const cnf_dataset* warmup,
                                 cnf_eval_mode mode, cnf_report** out) {
  return guarded([&] {
    need(p, test, warmup, out);
    const auto m = mode == CNF_EVAL_FREE_RUNNING ? cnf::EvalMode::free_running : cnf::EvalMode::teacher_forcing;
    *out = new cnf_report{cnf::evaluate(p->pipeline, test->data, warmup->data.matrix(), m)};
  });
}

void cnf_pipeline_free(cnf_pipeline* p) { delete p; }

/* ---- reports ---- */

cnf_status cnf_persistence_baseline(const cnf_dataset* test, const double* last_train_row, size_t dim,
                                    cnf_report** out) {
  return guarded([&] {
    need(test, last_train_row, out);
    *out = new cnf_report{cnf::persistence_baseline(test->data, std::span<const double>(last_train_row, dim))};
  });
}

size_t cnf_report_steps(const cnf_report* r) { return r ? r->report.per_step_errors.size() : 0; }

double cnf_report_error(const cnf_report* r, size_t t) {
  if (!r || t >= r->report.per_step_errors.size()) return std::numeric_limits<double>::quiet_NaN();
  return r->report.per_step_errors[t];
}

int cnf_report_valid(const cnf_report* r, size_t t) {
  if (!r || t >= r->report.valid.size()) return 0;
  return r->report.valid[t] ? 1 : 0;
}

double cnf_report_pmax(const cnf_report* r, size_t t) {
  if (!r || t >= r->report.p_max_series.size()) return std::numeric_limits<double>::quiet_NaN();
  return r->report.p_max_series[t];
}

double cnf_report_mean_error(const cnf_report* r) { return r ? r->report.mean_error : 0.0; }
size_t cnf_report_excluded(const cnf_report* r) { return r ? r->report.excluded : 0; }
size_t cnf_report_clamped(const cnf_report* r) { return r ? r->report.clamped : 0; }
void cnf_report_free(cnf_report* r) { delete r; }

/* ---- search ---- */

void cnf_search_spec_default(cnf_search_spec* spec) {
  if (!spec) return;
  const cnf::SearchSpec s;
  *spec = {s.draws, s.nodes_min, s.nodes_max, s.lag_min, s.lag_max, s.seed, s.validation_fraction, s.threads};
}

cnf_status cnf_search_run(const cnf_dataset* train, const cnf_search_spec* spec, const cnf_pipeline_config* base,
                          cnf_search** out) {
  return guarded([&] {
    need(train, spec, base, out);
    cnf::SearchSpec s;
    s.draws = spec->draws;
    s.nodes_min = spec->nodes_min;
    s.nodes_max = spec->nodes_max;
    s.lag_min = spec->lag_min;
    s.lag_max = spec->lag_max;
    s.seed = spec->seed;
    s.validation_fraction = spec->validation_fraction;
    s.threads = spec->threads;
    const auto cfg = to_cpp(*base);
    auto result = cnf::random_search(train->data, s, cfg);
    *out = new cnf_search{std::move(result), train->data, cfg};
  });
}

size_t cnf_search_trials(const cnf_search* s) { return s ? s->result.trials.size() : 0; }

cnf_status cnf_search_trial(const cnf_search* s, size_t index, size_t* nodes, size_t* lag, double* validation_error,
                            int* ok) {
  return guarded([&] {
    need(s);
    if (index >= s->result.trials.size()) cnf::fail(cnf::ErrorKind::contract, "trial index out of range");
    const auto& t = s->result.trials[index];
    if (nodes) *nodes = t.nodes;
    if (lag) *lag = t.lag;
    if (validation_error) *validation_error = t.validation_error;
    if (ok) *ok = t.ok ? 1 : 0;
  });
}

size_t cnf_search_best_index(const cnf_search* s) { return s ? s->result.best_index : 0; }

cnf_status cnf_search_refit(const cnf_search* s, cnf_pipeline** out) {
  return guarded([&] {
    need(s, out);
    cnf::PipelineConfig cfg = s->base;
    cfg.nodes = s->result.best_nodes;
    cfg.lag = s->result.best_lag;
    cfg.som.reset();
    *out = wrap_pipeline(cnf::pipeline_train(s->train, cfg));
  });
}

void cnf_search_free(cnf_search* s) { delete s; }

}  // extern "C"
