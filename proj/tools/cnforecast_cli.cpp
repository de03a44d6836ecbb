// cnforecast command-line front end. Talks to the library only through cnforecast.h.
#include <cnforecast/cnforecast.h>

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct CliFailure {
  int code;
  std::string message;
};

int exit_code_for(cnf_status s) {
  switch (s) {
    case CNF_OK:
      return kOk;
    case CNF_E_CONTRACT:
    case CNF_E_CONFIG:
      return kUsage;
    case CNF_E_PARSE:
    case CNF_E_IO:
    case CNF_E_RANGE:
    case CNF_E_INTEGRITY:
    case CNF_E_INSUFFICIENT_DATA:
    case CNF_E_DEGENERATE:
      return kData;
    default:
      return kNumeric;
  }
}

void check(cnf_status s) {
  if (s != CNF_OK) throw CliFailure{exit_code_for(s), std::string(cnf_status_name(s)) + ": " + cnf_last_error()};
}

[[noreturn]] void usage(const std::string& message) { throw CliFailure{kUsage, message}; }

struct DatasetDeleter {
  void operator()(cnf_dataset* d) const { cnf_dataset_free(d); }
};
struct SomDeleter {
  void operator()(cnf_som* s) const { cnf_som_free(s); }
};
struct PipelineDeleter {
  void operator()(cnf_pipeline* p) const { cnf_pipeline_free(p); }
};
struct ReportDeleter {
  void operator()(cnf_report* r) const { cnf_report_free(r); }
};
struct SearchDeleter {
  void operator()(cnf_search* s) const { cnf_search_free(s); }
};
using DatasetPtr = std::unique_ptr<cnf_dataset, DatasetDeleter>;
using SomPtr = std::unique_ptr<cnf_som, SomDeleter>;
using PipelinePtr = std::unique_ptr<cnf_pipeline, PipelineDeleter>;
using ReportPtr = std::unique_ptr<cnf_report, ReportDeleter>;
using SearchPtr = std::unique_ptr<cnf_search, SearchDeleter>;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit(const std::string& key, const std::string& value) { std::cout << key << '=' << value << '\n'; }
void emit(const std::string& key, double value) { emit(key, num(value)); }
void emit(const std::string& key, std::size_t value) { emit(key, std::to_string(value)); }

DatasetPtr load(const std::string& path) {
  cnf_dataset* d = nullptr;
  check(cnf_dataset_load_csv(path.c_str(), &d));
  return DatasetPtr(d);
}

DatasetPtr make(const std::vector<double>& values, std::size_t rows, std::size_t cols) {
  cnf_dataset* d = nullptr;
  check(cnf_dataset_create(values.data(), rows, cols, &d));
  return DatasetPtr(d);
}

void save(const cnf_dataset* d, const std::string& path, const char* header = nullptr) {
  check(cnf_dataset_save_csv(d, path.c_str(), header));
}

// Writes to `path`, or to standard output when path is empty.
void save_or_print(const cnf_dataset* d, const std::string& path, const char* header) {
  if (!path.empty()) {
    save(d, path, header);
    return;
  }
  char* text = nullptr;
  check(cnf_dataset_to_csv_string(d, header, &text));
  std::cout << text;
  cnf_string_free(text);
}

cnf_model_kind kind_of(const std::string& path) {
  cnf_model_kind kind{};
  check(cnf_model_kind_of(path.c_str(), &kind));
  return kind;
}

SomPtr load_som(const std::string& path) {
  cnf_som* s = nullptr;
  check(cnf_som_load(path.c_str(), &s));
  return SomPtr(s);
}

PipelinePtr load_pipeline(const std::string& path) {
  cnf_pipeline* p = nullptr;
  check(cnf_pipeline_load(path.c_str(), &p));
  return PipelinePtr(p);
}

// Either kind of model; `som` always points at the map.
struct AnyModel {
  SomPtr owned_som;
  PipelinePtr pipeline;
  const cnf_som* som = nullptr;
};

AnyModel load_any(const std::string& path) {
  AnyModel m;
  if (kind_of(path) == CNF_MODEL_SOM) {
    m.owned_som = load_som(path);
    m.som = m.owned_som.get();
  } else {
    m.pipeline = load_pipeline(path);
    m.som = cnf_pipeline_som(m.pipeline.get());
  }
  return m;
}

cnf_encode_mode parse_mode(const std::string& s) { return s == "weighted" ? CNF_ENCODE_WEIGHTED : CNF_ENCODE_ARGMAX; }

// Line number (1-based) in `path` of data row `row` (0-based), mirroring the
// CSV reader: a leading '#' line and blank lines are skipped.
std::size_t line_of_row(const std::string& path, std::size_t row) {
  std::ifstream in(path);
  std::string line;
  std::size_t line_no = 0, seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line_no == 1 && line[first] == '#') continue;
    if (seen++ == row) return line_no;
  }
  return row + 1;
}

std::vector<double> column(const cnf_dataset* d, std::size_t col) {
  const std::size_t rows = cnf_dataset_rows(d), cols = cnf_dataset_cols(d);
  const double* v = cnf_dataset_values(d);
  std::vector<double> out(rows);
  for (std::size_t i = 0; i < rows; ++i) out[i] = v[i * cols + col];
  return out;
}

// ---- commands --------------------------------------------------------------

struct SynthArgs {
  std::string kind = "uniform1d", out;
  std::size_t count = 500, rows = 5, cols = 6, steps = 2000;
  double low = 0.0, high = 1000.0, speed = 0.01, noise_sd = 0.0;
  std::uint64_t seed = 42;
};

void run_synth(const SynthArgs& a) {
  cnf_dataset* d = nullptr;
  if (a.kind == "uniform1d")
    check(cnf_synth_uniform_1d(a.count, a.low, a.high, a.seed, &d));
  else
    check(cnf_synth_traveling_wave(a.rows, a.cols, a.steps, a.speed, a.noise_sd, a.seed, &d));
  DatasetPtr data(d);
  save(data.get(), a.out);
  emit("rows", cnf_dataset_rows(data.get()));
  emit("cols", cnf_dataset_cols(data.get()));
  emit("out", a.out);
}

struct TrainSomArgs {
  std::string data, out, init = "linear";
  std::size_t nodes = 0;
  std::optional<std::size_t> epochs;
  std::optional<double> radius_start, radius_end;
  std::size_t sample_size = 100000;
  std::uint64_t seed = 42;
};

void run_train_som(const TrainSomArgs& a) {
  auto data = load(a.data);
  cnf_som_config cfg{};
  check(cnf_som_config_default(a.nodes, cnf_dataset_rows(data.get()), a.seed, &cfg));
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.radius_start) cfg.radius_start = *a.radius_start;
  if (a.radius_end) cfg.radius_end = *a.radius_end;
  cfg.init = a.init == "random-sample" ? CNF_INIT_RANDOM_SAMPLE : CNF_INIT_LINEAR;
  cnf_som* s = nullptr;
  check(cnf_som_train(data.get(), &cfg, &s));
  SomPtr som(s);
  double qe = 0.0, order = 0.0;
  check(cnf_som_quantization_error(som.get(), data.get(), &qe));
  if (a.nodes >= 3) check(cnf_som_ordering_score(som.get(), a.sample_size, a.seed, &order));
  check(cnf_som_save(som.get(), a.out.c_str()));
  emit("nodes", a.nodes);
  emit("epochs", cfg.epochs);
  emit("quantization_error", qe);
  if (a.nodes >= 3) emit("ordering_score", order);
  emit("out", a.out);
}

struct TrainPipelineArgs {
  std::string data, out, mode = "argmax", normalization = "zscore";
  std::size_t nodes = 0, lag = 1, g = 3;
  double beta = 0.0;
  std::uint64_t seed = 42;
};

void run_train_pipeline(const TrainPipelineArgs& a) {
  auto data = load(a.data);
  cnf_pipeline_config cfg{};
  cnf_pipeline_config_default(a.nodes, a.lag, &cfg);
  cfg.mode = parse_mode(a.mode);
  cfg.g = a.g;
  cfg.beta = a.beta;
  cfg.seed = a.seed;
  cfg.normalization = a.normalization == "none" ? CNF_NORM_NONE : CNF_NORM_ZSCORE;
  cnf_pipeline* p = nullptr;
  check(cnf_pipeline_train(data.get(), &cfg, &p));
  PipelinePtr pipeline(p);
  check(cnf_pipeline_save(pipeline.get(), a.out.c_str()));
  emit("nodes", cnf_pipeline_nodes(pipeline.get()));
  emit("lag", cnf_pipeline_lag(pipeline.get()));
  emit("beta", cnf_pipeline_beta(pipeline.get()));
  emit("baseline_pmax", cnf_pipeline_baseline_pmax(pipeline.get()));
  emit("out", a.out);
}

struct EncodeArgs {
  std::string model, data, out, mode = "argmax";
  std::size_t g = 3;
  std::optional<double> beta;
};

void run_encode(const EncodeArgs& a) {
  auto m = load_any(a.model);
  auto data = load(a.data);
  const std::size_t rows = cnf_dataset_rows(data.get());
  std::vector<double> cn(rows), pmax(rows);
  if (m.pipeline) {
    if (a.beta) usage("--beta applies to SOM models only; pipelines carry their own");
    check(cnf_pipeline_encode(m.pipeline.get(), data.get(), cn.data(), pmax.data()));
  } else {
    double beta = 0.0;
    if (a.beta)
      beta = *a.beta;
    else
      check(cnf_som_default_beta(m.som, data.get(), &beta));
    check(cnf_som_encode(m.som, data.get(), parse_mode(a.mode), a.g, beta, cn.data(), pmax.data()));
  }
  std::vector<double> table;
  table.reserve(2 * rows);
  for (std::size_t i = 0; i < rows; ++i) {
    table.push_back(cn[i]);
    table.push_back(pmax[i]);
  }
  save(make(table, rows, 2).get(), a.out, "cn,p_max");
  emit("rows", rows);
  emit("out", a.out);
}

struct DecodeArgs {
  std::string model, cn, out;
};

void run_decode(const DecodeArgs& a) {
  auto m = load_any(a.model);
  auto cn_data = load(a.cn);
  if (cnf_dataset_cols(cn_data.get()) < 1) usage("empty contextual-number file");
  const auto cns = column(cn_data.get(), 0);
  cnf_dataset* d = nullptr;
  std::size_t bad = 0;
  const cnf_status s = m.pipeline ? cnf_pipeline_decode(m.pipeline.get(), cns.data(), cns.size(), &d, &bad)
                                  : cnf_som_decode(m.som, cns.data(), cns.size(), &d, &bad);
  if (s == CNF_E_RANGE) {
    throw CliFailure{kData, a.cn + ": line " + std::to_string(line_of_row(a.cn, bad)) + ": " + cnf_last_error()};
  }
  check(s);
  DatasetPtr out(d);
  save(out.get(), a.out);
  emit("rows", cns.size());
  emit("out", a.out);
}

struct ForecastArgs {
  std::string model, recent, out;
  std::size_t horizon = 1;
};

void run_forecast(const ForecastArgs& a) {
  if (a.horizon < 1) usage("--horizon must be at least 1");
  auto p = load_pipeline(a.model);
  auto recent = load(a.recent);
  const std::size_t lag = cnf_pipeline_lag(p.get());
  if (cnf_dataset_rows(recent.get()) != lag) {
    usage("--recent must hold exactly " + std::to_string(lag) + " rows (found " +
          std::to_string(cnf_dataset_rows(recent.get())) + ")");
  }
  cnf_dataset* d = nullptr;
  std::size_t clamped = 0;
  check(cnf_pipeline_forecast(p.get(), recent.get(), a.horizon, &d, &clamped));
  DatasetPtr out(d);
  if (clamped) std::cerr << "warning: " << clamped << " predicted contextual number(s) clamped to [1, K]\n";
  save(out.get(), a.out);
  emit("horizon", a.horizon);
  emit("clamped", clamped);
  emit("out", a.out);
}

struct EvaluateArgs {
  std::string model, test, warmup, out, baseline = "persistence", mode = "teacher-forcing";
};

void run_evaluate(const EvaluateArgs& a) {
  auto p = load_pipeline(a.model);
  auto test = load(a.test);
  const std::size_t lag = cnf_pipeline_lag(p.get());
  DatasetPtr warmup;
  if (!a.warmup.empty()) {
    warmup = load(a.warmup);
  } else {
    // The first d test rows prime the lags and are not scored.
    if (cnf_dataset_rows(test.get()) <= lag)
      throw CliFailure{kData, "test data needs more than " + std::to_string(lag) + " rows without --warmup"};
    cnf_dataset *w = nullptr, *rest = nullptr;
    check(cnf_dataset_split(test.get(), lag, &w, &rest));
    warmup.reset(w);
    test.reset(rest);
  }
  const cnf_eval_mode mode = a.mode == "free-running" ? CNF_EVAL_FREE_RUNNING : CNF_EVAL_TEACHER_FORCING;
  cnf_report* r = nullptr;
  check(cnf_pipeline_evaluate(p.get(), test.get(), warmup.get(), mode, &r));
  ReportPtr report(r);

  ReportPtr base;
  if (a.baseline == "persistence") {
    const std::size_t n = cnf_dataset_cols(warmup.get());
    const double* last = cnf_dataset_values(warmup.get()) + (cnf_dataset_rows(warmup.get()) - 1) * n;
    cnf_report* b = nullptr;
    check(cnf_persistence_baseline(test.get(), last, n, &b));
    base.reset(b);
  }

  const std::size_t steps = cnf_report_steps(report.get());
  const std::size_t width = base ? 5 : 4;
  std::vector<double> table;
  table.reserve(steps * width);
  for (std::size_t t = 0; t < steps; ++t) {
    table.push_back(static_cast<double>(t));
    table.push_back(cnf_report_error(report.get(), t));
    table.push_back(cnf_report_pmax(report.get(), t));
    if (base) table.push_back(cnf_report_error(base.get(), t));
    table.push_back(cnf_report_valid(report.get(), t) ? 1.0 : 0.0);
  }
  const char* header = base ? "t,e_t,p_max,baseline_e_t,valid" : "t,e_t,p_max,valid";
  save(make(table, steps, width).get(), a.out, header);

  const std::size_t excluded = cnf_report_excluded(report.get());
  if (excluded) std::cerr << "warning: " << excluded << " test row(s) with zero norm excluded from the mean\n";
  if (const std::size_t c = cnf_report_clamped(report.get()))
    std::cerr << "warning: " << c << " predicted contextual number(s) clamped to [1, K]\n";
  emit("steps", steps);
  emit("mean_error", cnf_report_mean_error(report.get()));
  if (base) emit("baseline_mean_error", cnf_report_mean_error(base.get()));
  emit("excluded", excluded);
  emit("out", a.out);
}

struct SearchArgs {
  std::string train, out, model_out, mode = "argmax";
  std::size_t draws = 25, k_min = 30, k_max = 200, d_min = 2, d_max = 20, g = 3, threads = 1;
  double validation_fraction = 0.2;
  std::uint64_t seed = 42;
};

void run_search(const SearchArgs& a) {
  auto train = load(a.train);
  cnf_search_spec spec{};
  cnf_search_spec_default(&spec);
  spec.draws = a.draws;
  spec.nodes_min = a.k_min;
  spec.nodes_max = a.k_max;
  spec.lag_min = a.d_min;
  spec.lag_max = a.d_max;
  spec.seed = a.seed;
  spec.validation_fraction = a.validation_fraction;
  spec.threads = a.threads;
  cnf_pipeline_config base{};
  cnf_pipeline_config_default(a.k_min, a.d_min, &base);
  base.mode = parse_mode(a.mode);
  base.g = a.g;
  base.seed = a.seed;

  cnf_search* s = nullptr;
  check(cnf_search_run(train.get(), &spec, &base, &s));
  SearchPtr search(s);

  const std::size_t n = cnf_search_trials(search.get());
  std::vector<double> table;
  table.reserve(n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0, d = 0;
    double err = 0.0;
    int ok = 0;
    check(cnf_search_trial(search.get(), i, &k, &d, &err, &ok));
    table.insert(table.end(), {static_cast<double>(k), static_cast<double>(d), ok ? err : -1.0, ok ? 1.0 : 0.0});
    if (!ok) std::cerr << "trial " << i << " (K=" << k << ", d=" << d << ") failed\n";
  }
  const std::size_t best = cnf_search_best_index(search.get());
  std::size_t best_k = 0, best_d = 0;
  double best_err = 0.0;
  int best_ok = 0;
  check(cnf_search_trial(search.get(), best, &best_k, &best_d, &best_err, &best_ok));

  cnf_pipeline* p = nullptr;
  check(cnf_search_refit(search.get(), &p));
  PipelinePtr winner(p);
  auto trials = make(table, n, 4);

  check(cnf_pipeline_save(winner.get(), a.model_out.c_str()));
  try {
    save(trials.get(), a.out, "K,d,validation_error,ok");
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(a.model_out, ec);
    throw;
  }
  emit("draws", n);
  emit("best_index", best);
  emit("best_nodes", best_k);
  emit("best_lag", best_d);
  emit("best_validation_error", best_err);
  emit("out", a.out);
  emit("model_out", a.model_out);
}

struct InspectArgs {
  std::string model, emit_what, data, out;
  std::optional<double> beta;
  std::size_t sample_size = 100000;
  std::uint64_t seed = 42;
};

void run_inspect(const InspectArgs& a) {
  auto m = load_any(a.model);
  if (a.emit_what == "weights") {
    cnf_dataset* d = nullptr;
    check(cnf_som_weights(m.som, &d));
    save_or_print(DatasetPtr(d).get(), a.out, nullptr);
  } else if (a.emit_what == "pairwise-distances") {
    cnf_dataset* d = nullptr;
    check(cnf_som_pairwise_distances(m.som, &d));
    save_or_print(DatasetPtr(d).get(), a.out, nullptr);
  } else if (a.emit_what == "ordering-score") {
    double score = 0.0;
    check(cnf_som_ordering_score(m.som, a.sample_size, a.seed, &score));
    emit("ordering_score", score);
  } else {  // pmax-series
    if (a.data.empty()) usage("--emit pmax-series needs --data");
    auto data = load(a.data);
    const std::size_t rows = cnf_dataset_rows(data.get());
    std::vector<double> pmax(rows);
    if (m.pipeline) {
      check(cnf_pipeline_encode(m.pipeline.get(), data.get(), nullptr, pmax.data()));
    } else {
      double beta = 0.0;
      if (a.beta)
        beta = *a.beta;
      else
        check(cnf_som_default_beta(m.som, data.get(), &beta));
      check(cnf_som_encode(m.som, data.get(), CNF_ENCODE_ARGMAX, 1, beta, nullptr, pmax.data()));
    }
    save_or_print(make(pmax, rows, 1).get(), a.out, "p_max");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual-number forecasting with one-dimensional self-organizing maps"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--kind", synth.kind)->check(CLI::IsMember({"uniform1d", "wave"}));
  c_synth->add_option("--count", synth.count, "uniform1d: number of samples");
  c_synth->add_option("--low", synth.low, "uniform1d: lower bound");
  c_synth->add_option("--high", synth.high, "uniform1d: upper bound (exclusive)");
  c_synth->add_option("--rows", synth.rows, "wave: grid rows");
  c_synth->add_option("--cols", synth.cols, "wave: grid columns");
  c_synth->add_option("--steps", synth.steps, "wave: time steps");
  c_synth->add_option("--speed", synth.speed, "wave: periods travelled per step");
  c_synth->add_option("--noise-sd", synth.noise_sd, "wave: Gaussian noise level");
  c_synth->add_option("--seed", synth.seed);
  c_synth->add_option("--out", synth.out)->required();

  TrainSomArgs tsom;
  auto* c_tsom = app.add_subcommand("train-som", "Train a one-dimensional SOM");
  c_tsom->add_option("--data", tsom.data)->required();
  c_tsom->add_option("--nodes", tsom.nodes, "number of nodes K")->required();
  c_tsom->add_option("--epochs", tsom.epochs);
  c_tsom->add_option("--radius-start", tsom.radius_start);
  c_tsom->add_option("--radius-end", tsom.radius_end);
  c_tsom->add_option("--init", tsom.init)->check(CLI::IsMember({"linear", "random-sample"}));
  c_tsom->add_option("--sample-size", tsom.sample_size, "triples sampled for the ordering score");
  c_tsom->add_option("--seed", tsom.seed);
  c_tsom->add_option("--out", tsom.out)->required();

  TrainPipelineArgs tpipe;
  auto* c_tpipe = app.add_subcommand("train-pipeline", "Train a SOM + AR forecasting pipeline");
  c_tpipe->add_option("--data", tpipe.data)->required();
  c_tpipe->add_option("--nodes", tpipe.nodes)->required();
  c_tpipe->add_option("--lag", tpipe.lag)->required();
  c_tpipe->add_option("--mode", tpipe.mode)->check(CLI::IsMember({"argmax", "weighted"}));
  c_tpipe->add_option("--g", tpipe.g);
  c_tpipe->add_option("--beta", tpipe.beta, "<= 0 derives it from the data");
  c_tpipe->add_option("--normalization", tpipe.normalization)->check(CLI::IsMember({"none", "zscore"}));
  c_tpipe->add_option("--seed", tpipe.seed);
  c_tpipe->add_option("--out", tpipe.out)->required();

  EncodeArgs enc;
  auto* c_enc = app.add_subcommand("encode", "Map observations to contextual numbers");
  c_enc->add_option("--model", enc.model)->required();
  c_enc->add_option("--data", enc.data)->required();
  c_enc->add_option("--mode", enc.mode)->check(CLI::IsMember({"argmax", "weighted"}));
  c_enc->add_option("--g", enc.g);
  c_enc->add_option("--beta", enc.beta);
  c_enc->add_option("--out", enc.out)->required();

  DecodeArgs dec;
  auto* c_dec = app.add_subcommand("decode", "Map contextual numbers back to observations");
  c_dec->add_option("--model", dec.model)->required();
  c_dec->add_option("--cn", dec.cn, "CSV whose first column holds contextual numbers")->required();
  c_dec->add_option("--out", dec.out)->required();

  ForecastArgs fc;
  auto* c_fc = app.add_subcommand("forecast", "Forecast future observations");
  c_fc->add_option("--model", fc.model)->required();
  c_fc->add_option("--recent", fc.recent, "the d most recent observations, oldest first")->required();
  c_fc->add_option("--horizon", fc.horizon);
  c_fc->add_option("--out", fc.out)->required();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "One-step-ahead evaluation on test data");
  c_ev->add_option("--model", ev.model)->required();
  c_ev->add_option("--test", ev.test)->required();
  c_ev->add_option("--warmup", ev.warmup, "rows preceding the test set (default: first d test rows)");
  c_ev->add_option("--baseline", ev.baseline)->check(CLI::IsMember({"persistence", "none"}));
  c_ev->add_option("--mode", ev.mode)->check(CLI::IsMember({"teacher-forcing", "free-running"}));
  c_ev->add_option("--out", ev.out)->required();

  SearchArgs se;
  auto* c_se = app.add_subcommand("search", "Random search over K and d");
  c_se->add_option("--train", se.train)->required();
  c_se->add_option("--draws", se.draws);
  c_se->add_option("--k-min", se.k_min);
  c_se->add_option("--k-max", se.k_max);
  c_se->add_option("--d-min", se.d_min);
  c_se->add_option("--d-max", se.d_max);
  c_se->add_option("--validation-fraction", se.validation_fraction);
  c_se->add_option("--mode", se.mode)->check(CLI::IsMember({"argmax", "weighted"}));
  c_se->add_option("--g", se.g);
  c_se->add_option("--threads", se.threads);
  c_se->add_option("--seed", se.seed);
  c_se->add_option("--out", se.out, "per-trial CSV")->required();
  c_se->add_option("--model-out", se.model_out, "winning pipeline, refit on all training rows")->required();

  InspectArgs in;
  auto* c_in = app.add_subcommand("inspect", "Emit model internals as CSV");
  c_in->add_option("--model", in.model)->required();
  c_in->add_option("--emit", in.emit_what)
      ->required()
      ->check(CLI::IsMember({"weights", "pairwise-distances", "ordering-score", "pmax-series"}));
  c_in->add_option("--data", in.data, "observations for pmax-series");
  c_in->add_option("--beta", in.beta, "SOM models: posterior sharpness");
  c_in->add_option("--sample-size", in.sample_size);
  c_in->add_option("--seed", in.seed);
  c_in->add_option("--out", in.out, "default: standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c_synth) run_synth(synth);
    if (*c_tsom) run_train_som(tsom);
    if (*c_tpipe) run_train_pipeline(tpipe);
    if (*c_enc) run_encode(enc);
    if (*c_dec) run_decode(dec);
    if (*c_fc) run_forecast(fc);
    if (*c_ev) run_evaluate(ev);
    if (*c_se) run_search(se);
    if (*c_in) run_inspect(in);
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kOk;
}
