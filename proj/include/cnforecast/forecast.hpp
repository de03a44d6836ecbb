#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cnforecast/encoder.hpp"
#include "cnforecast/som.hpp"

namespace cnf {

// Row t holds [cn_{t+d-1}, ..., cn_t] (most recent first); target is cn_{t+d}.
struct LagMatrix {
  Matrix regressors;
  std::vector<double> targets;
};

LagMatrix lag_embed(std::span<const double> series, std::size_t lag);

// Least squares intercept + lag coefficients. Rank-deficient designs fall
// back to ridge (lambda = 1e-8) on centered regressors and set model.ridge.
ForecastModel fit_ar(std::span<const double> series, std::size_t lag);

struct Prediction {
  double value = 0.0;
  bool clamped = false;
};

// intercept + sum coefficients[i] * recent[i]; recent is most recent first.
double predict_raw(const ForecastModel& model, std::span<const double> recent);

// predict_raw clamped to [1, nodes].
Prediction predict_next(const ForecastModel& model, std::span<const double> recent, std::size_t nodes);

// Iterates predict_next `horizon` times in contextual-number space, feeding
// each prediction back as the newest lag. recent_codes is oldest first and
// must hold at least d values.
std::vector<Prediction> forecast_codes(const ForecastModel& model, std::span<const double> recent_codes,
                                       std::size_t horizon, std::size_t nodes);

struct PipelineConfig {
  std::size_t nodes = 0;  // K
  std::size_t lag = 1;    // d
  EncodeMode mode = EncodeMode::argmax;
  std::size_t g = 3;
  std::optional<double> beta;      // derived from the training data when empty
  std::optional<TrainConfig> som;  // default_train_config(nodes, N, seed) when empty
  std::uint64_t seed = 42;
  NormalizationMode normalization = NormalizationMode::zscore;
};

struct CnPipeline {
  SomModel som;
  ForecastModel forecaster;
  NormalizationParams norm;
  EncodeConfig encode;
  double baseline_pmax = 0.0;  // mean p_max over the training rows
  std::size_t training_rows = 0;

  std::size_t nodes() const noexcept { return som.nodes(); }
  std::size_t lag() const noexcept { return forecaster.lag(); }
  std::size_t dim() const noexcept { return som.dim(); }

  friend bool operator==(const CnPipeline&, const CnPipeline&) = default;
};

CnPipeline pipeline_train(const Dataset& data, const PipelineConfig& cfg);

// Contextual number and p_max of a raw (un-normalized) observation.
ContextualNumber pipeline_encode(const CnPipeline& p, std::span<const double> observation);
double pipeline_p_max(const CnPipeline& p, std::span<const double> observation);
// Observation-space vector for a contextual number.
std::vector<double> pipeline_decode(const CnPipeline& p, ContextualNumber cn);

struct ForecastResult {
  Matrix predictions;                      // horizon x n, original units
  std::vector<double> contextual_numbers;  // predicted cn per step, after clamping
  std::size_t clamped = 0;
};

// `recent` holds exactly d observations, oldest first.
ForecastResult pipeline_forecast(const CnPipeline& p, const Matrix& recent, std::size_t horizon);

enum class EvalMode { teacher_forcing, free_running };

struct EvalReport {
  std::vector<double> per_step_errors;  // 0 where the step was excluded
  std::vector<bool> valid;              // false where ||x_t|| == 0
  std::vector<double> p_max_series;     // empty for baselines
  double mean_error = 0.0;
  std::size_t excluded = 0;
  std::size_t clamped = 0;
  std::size_t nodes = 0;
  std::size_t lag = 0;
  std::size_t g = 0;
  double beta = 0.0;
};

// One-step-ahead evaluation over `test`. `warmup` supplies (at least) the d
// observations preceding the first test row; its last d rows are used.
EvalReport evaluate(const CnPipeline& p, const Dataset& test, const Matrix& warmup,
                    EvalMode mode = EvalMode::teacher_forcing);

// Predicts x_t = x_{t-1}, with last_train_row standing in for x_{-1}.
EvalReport persistence_baseline(const Dataset& test, std::span<const double> last_train_row);

struct SearchSpec {
  std::size_t draws = 25;
  std::size_t nodes_min = 30;
  std::size_t nodes_max = 200;
  std::size_t lag_min = 2;
  std::size_t lag_max = 20;
  std::uint64_t seed = 42;
  double validation_fraction = 0.2;
  std::size_t threads = 1;
};

struct Trial {
  std::size_t nodes = 0;
  std::size_t lag = 0;
  double validation_error = 0.0;
  bool ok = false;
  std::string message;  // failure reason
};

struct SearchResult {
  std::size_t best_nodes = 0;
  std::size_t best_lag = 0;
  std::size_t best_index = 0;
  std::vector<Trial> trials;  // draw order
};

// `base` supplies everything except nodes and lag.
SearchResult random_search(const Dataset& train, const SearchSpec& spec, const PipelineConfig& base);

}  // namespace cnf
