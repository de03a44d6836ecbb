#include "cnforecast/forecast.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <Eigen/Dense>

#include "cnforecast/data_io.hpp"
#include "cnforecast/rng.hpp"

namespace cnf {

namespace {

constexpr double kRidgeLambda = 1e-8;

std::vector<double> reversed_tail(std::span<const double> series, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = series[series.size() - 1 - i];
  return out;
}

}  // namespace

LagMatrix lag_embed(std::span<const double> series, std::size_t lag) {
  require(lag >= 1, "lag must be at least 1");
  if (series.size() <= lag) {
    fail(ErrorKind::insufficient_data, "series of length " + std::to_string(series.size()) +
                                           " is too short for lag " + std::to_string(lag));
  }
  for (double v : series) require(std::isfinite(v), "series entries must be finite");
  const std::size_t rows = series.size() - lag;
  LagMatrix out{Matrix(rows, lag), std::vector<double>(rows)};
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t i = 0; i < lag; ++i) out.regressors(t, i) = series[t + lag - 1 - i];
    out.targets[t] = series[t + lag];
  }
  return out;
}

ForecastModel fit_ar(std::span<const double> series, std::size_t lag) {
  if (series.size() <= lag + 1) {
    fail(ErrorKind::insufficient_data, "fitting lag " + std::to_string(lag) + " needs more than " +
                                           std::to_string(lag + 1) + " values, got " +
                                           std::to_string(series.size()));
  }
  const LagMatrix lm = lag_embed(series, lag);
  const auto rows = static_cast<Eigen::Index>(lm.targets.size());
  const auto d = static_cast<Eigen::Index>(lag);

  Eigen::MatrixXd design(rows, d + 1);
  Eigen::VectorXd y(rows);
  for (Eigen::Index t = 0; t < rows; ++t) {
    design(t, 0) = 1.0;
    for (Eigen::Index i = 0; i < d; ++i)
      design(t, i + 1) = lm.regressors(static_cast<std::size_t>(t), static_cast<std::size_t>(i));
    y(t) = lm.targets[static_cast<std::size_t>(t)];
  }

  ForecastModel model;
  model.coefficients.assign(lag, 0.0);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() == d + 1) {
    const Eigen::VectorXd beta = qr.solve(y);
    model.intercept = beta(0);
    for (Eigen::Index i = 0; i < d; ++i) model.coefficients[static_cast<std::size_t>(i)] = beta(i + 1);
    return model;
  }

  // Ridge on centered regressors; the intercept is left unpenalized.
  const Eigen::RowVectorXd x_mean = design.rightCols(d).colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = design.rightCols(d).rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += kRidgeLambda;
  const Eigen::VectorXd coef = gram.ldlt().solve(xc.transpose() * yc);
  model.intercept = y_mean - x_mean.dot(coef);
  for (Eigen::Index i = 0; i < d; ++i) model.coefficients[static_cast<std::size_t>(i)] = coef(i);
  model.ridge = true;
  return model;
}

double predict_raw(const ForecastModel& model, std::span<const double> recent) {
  require(recent.size() == model.lag(), "predict_next needs exactly d recent values");
  double v = model.intercept;
  for (std::size_t i = 0; i < recent.size(); ++i) v += model.coefficients[i] * recent[i];
  return v;
}

Prediction predict_next(const ForecastModel& model, std::span<const double> recent, std::size_t nodes) {
  require(nodes >= 1, "clamp range needs at least one node");
  const double raw = predict_raw(model, recent);
  const double top = static_cast<double>(nodes);
  if (std::isnan(raw)) return {1.0, true};
  if (raw < 1.0) return {1.0, true};
  if (raw > top) return {top, true};
  return {raw, false};
}

std::vector<Prediction> forecast_codes(const ForecastModel& model, std::span<const double> recent_codes,
                                       std::size_t horizon, std::size_t nodes) {
  require(recent_codes.size() >= model.lag(), "forecast needs at least d recent contextual numbers");
  std::vector<double> codes(recent_codes.begin(), recent_codes.end());
  std::vector<Prediction> out;
  out.reserve(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    const auto lags = reversed_tail(codes, model.lag());
    out.push_back(predict_next(model, lags, nodes));
    codes.push_back(out.back().value);
  }
  return out;
}

CnPipeline pipeline_train(const Dataset& data, const PipelineConfig& cfg) {
  if (cfg.lag < 1) fail(ErrorKind::config, "lag must be at least 1");
  if (data.size() <= cfg.lag + 1) {
    fail(ErrorKind::insufficient_data, "pipeline with lag " + std::to_string(cfg.lag) + " needs more than " +
                                           std::to_string(cfg.lag + 1) + " observations, got " +
                                           std::to_string(data.size()));
  }
  const NormalizationParams norm = normalize_fit(data, cfg.normalization);
  const Dataset normalized = normalize_apply(norm, data);

  TrainConfig train_cfg = cfg.som ? *cfg.som : default_train_config(cfg.nodes, data.size(), cfg.seed);
  if (cfg.som && cfg.nodes != 0 && cfg.nodes != train_cfg.nodes)
    fail(ErrorKind::config, "pipeline node count disagrees with its SOM configuration");
  SomModel som = train(normalized, train_cfg);

  EncodeConfig enc;
  enc.mode = cfg.mode;
  enc.g = std::min(cfg.g, som.nodes());
  enc.beta = cfg.beta ? *cfg.beta : default_beta(som, normalized);
  validate(enc, som.nodes());

  std::vector<double> series(normalized.size());
  double pmax_sum = 0.0;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    series[i] = encode(som, normalized.row(i), enc).value;
    pmax_sum += p_max(som, normalized.row(i), enc.beta);
  }
  ForecastModel forecaster = fit_ar(series, cfg.lag);

  return CnPipeline{std::move(som), std::move(forecaster), norm, enc,
                    pmax_sum / static_cast<double>(normalized.size()), data.size()};
}

ContextualNumber pipeline_encode(const CnPipeline& p, std::span<const double> observation) {
  const auto z = normalize_apply(p.norm, observation);
  return encode(p.som, z, p.encode);
}

double pipeline_p_max(const CnPipeline& p, std::span<const double> observation) {
  const auto z = normalize_apply(p.norm, observation);
  return p_max(p.som, z, p.encode.beta);
}

std::vector<double> pipeline_decode(const CnPipeline& p, ContextualNumber cn) {
  return normalize_invert(p.norm, decode(p.som, cn));
}

ForecastResult pipeline_forecast(const CnPipeline& p, const Matrix& recent, std::size_t horizon) {
  require(horizon >= 1, "horizon must be at least 1");
  require(recent.rows() == p.lag(), "forecast needs exactly d recent observations");
  require(recent.cols() == p.dim(), "observation dimension does not match the pipeline");

  std::vector<double> codes;
  codes.reserve(p.lag());
  for (std::size_t i = 0; i < recent.rows(); ++i) codes.push_back(pipeline_encode(p, recent.row(i)).value);

  ForecastResult out{Matrix(horizon, p.dim()), {}, 0};
  const auto steps = forecast_codes(p.forecaster, codes, horizon, p.nodes());
  for (std::size_t h = 0; h < horizon; ++h) {
    if (steps[h].clamped) ++out.clamped;
    out.contextual_numbers.push_back(steps[h].value);
    const auto x = pipeline_decode(p, {steps[h].value});
    std::ranges::copy(x, out.predictions.row(h).begin());
  }
  return out;
}

namespace {

void finish_report(EvalReport& report) {
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t < report.per_step_errors.size(); ++t) {
    if (!report.valid[t]) continue;
    sum += report.per_step_errors[t];
    ++used;
  }
  if (used == 0) fail(ErrorKind::degenerate, "every reference observation has zero norm");
  report.mean_error = sum / static_cast<double>(used);
}

void record_step(EvalReport& report, std::span<const double> est, std::span<const double> real) {
  if (norm(real) == 0.0) {
    report.per_step_errors.push_back(0.0);
    report.valid.push_back(false);
    ++report.excluded;
    return;
  }
  report.per_step_errors.push_back(relative_error(est, real));
  report.valid.push_back(true);
}

}  // namespace

EvalReport evaluate(const CnPipeline& p, const Dataset& test, const Matrix& warmup, EvalMode mode) {
  require(test.dim() == p.dim(), "test dimension does not match the pipeline");
  require(warmup.cols() == p.dim(), "warmup dimension does not match the pipeline");
  const std::size_t d = p.lag();
  if (warmup.rows() < d) {
    fail(ErrorKind::insufficient_data, "warmup needs at least d=" + std::to_string(d) + " observations");
  }

  EvalReport report;
  report.nodes = p.nodes();
  report.lag = d;
  report.g = p.encode.g;
  report.beta = p.encode.beta;
  for (std::size_t t = 0; t < test.size(); ++t) report.p_max_series.push_back(pipeline_p_max(p, test.row(t)));

  Matrix start(d, p.dim());
  for (std::size_t i = 0; i < d; ++i)
    std::ranges::copy(warmup.row(warmup.rows() - d + i), start.row(i).begin());

  if (mode == EvalMode::free_running) {
    const ForecastResult run = pipeline_forecast(p, start, test.size());
    report.clamped = run.clamped;
    for (std::size_t t = 0; t < test.size(); ++t) record_step(report, run.predictions.row(t), test.row(t));
    finish_report(report);
    return report;
  }

  std::vector<double> codes;
  codes.reserve(d + test.size());
  for (std::size_t i = 0; i < d; ++i) codes.push_back(pipeline_encode(p, start.row(i)).value);
  for (std::size_t t = 0; t < test.size(); ++t) {
    const auto lags = reversed_tail(codes, d);
    const Prediction next = predict_next(p.forecaster, lags, p.nodes());
    if (next.clamped) ++report.clamped;
    record_step(report, pipeline_decode(p, {next.value}), test.row(t));
    codes.push_back(pipeline_encode(p, test.row(t)).value);
  }
  finish_report(report);
  return report;
}

EvalReport persistence_baseline(const Dataset& test, std::span<const double> last_train_row) {
  require(last_train_row.size() == test.dim(), "previous observation has the wrong dimension");
  EvalReport report;
  for (std::size_t t = 0; t < test.size(); ++t) {
    record_step(report, t == 0 ? last_train_row : test.row(t - 1), test.row(t));
  }
  finish_report(report);
  return report;
}

SearchResult random_search(const Dataset& train, const SearchSpec& spec, const PipelineConfig& base) {
  if (spec.draws < 1) fail(ErrorKind::config, "search needs at least one draw");
  if (spec.nodes_min < 2 || spec.nodes_min > spec.nodes_max) fail(ErrorKind::config, "invalid node range");
  if (spec.lag_min < 1 || spec.lag_min > spec.lag_max) fail(ErrorKind::config, "invalid lag range");
  if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0))
    fail(ErrorKind::config, "validation fraction must lie in (0, 1)");

  const auto fit_rows = static_cast<std::size_t>(
      std::floor(static_cast<double>(train.size()) * (1.0 - spec.validation_fraction)));
  if (fit_rows < 2 || fit_rows >= train.size())
    fail(ErrorKind::insufficient_data, "training data too short for a fit/validation split");
  const Dataset fit = slice_rows(train, 0, fit_rows);
  const Dataset validation = slice_rows(train, fit_rows, train.size());

  SearchResult result;
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < spec.draws; ++i) {
    Trial trial;
    trial.nodes = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(spec.nodes_min),
                                                           static_cast<std::int64_t>(spec.nodes_max)));
    trial.lag = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(spec.lag_min),
                                                         static_cast<std::int64_t>(spec.lag_max)));
    result.trials.push_back(trial);
  }

  auto run_trial = [&](Trial& trial) {
    try {
      PipelineConfig cfg = base;
      cfg.nodes = trial.nodes;
      cfg.lag = trial.lag;
      cfg.som.reset();
      const CnPipeline p = pipeline_train(fit, cfg);
      const EvalReport report = evaluate(p, validation, fit.matrix());
      trial.validation_error = report.mean_error;
      trial.ok = std::isfinite(report.mean_error);
      if (!trial.ok) trial.message = "non-finite validation error";
    } catch (const Error& e) {
      trial.ok = false;
      trial.message = e.what();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(spec.threads, 1, spec.draws);
  if (workers == 1) {
    for (Trial& t : result.trials) run_trial(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < result.trials.size(); i = next++) run_trial(result.trials[i]);
      });
    }
  }

  bool found = false;
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const Trial& t = result.trials[i];
    if (!t.ok) continue;
    if (!found || t.validation_error < result.trials[result.best_index].validation_error) {
      result.best_index = i;
      found = true;
    }
  }
  if (!found) fail(ErrorKind::numeric, "every search trial failed");
  result.best_nodes = result.trials[result.best_index].nodes;
  result.best_lag = result.trials[result.best_index].lag;
  return result;
}

}  // namespace cnf
