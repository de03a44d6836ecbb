#pragma once

#include <string>
#include <vector>

#include "cnforecast/som.hpp"

namespace cnf {

enum class EncodeMode { argmax, weighted };

const char* to_string(EncodeMode mode) noexcept;
EncodeMode parse_encode_mode(const std::string& text);

struct EncodeConfig {
  std::size_t g = 3;  // top nodes averaged in weighted mode
  double beta = 1.0;  // similarity sharpness
  EncodeMode mode = EncodeMode::argmax;

  friend bool operator==(const EncodeConfig&, const EncodeConfig&) = default;
};

void validate(const EncodeConfig& cfg, std::size_t nodes);

// s(w, x) = -beta * ||x - w||^2
double similarity(std::span<const double> w, std::span<const double> x, double beta);

// Softmax of the similarities over all nodes, max-subtracted; entries below
// 1e-300 are flushed to zero before renormalizing.
Posterior posterior(const SomModel& model, std::span<const double> x, double beta);

ContextualNumber encode_argmax(const SomModel& model, std::span<const double> x, double beta);

struct WeightedCode {
  ContextualNumber cn;
  bool noncontiguous = false;  // the selected top-g nodes do not form one run of indices
};

WeightedCode encode_weighted(const SomModel& model, std::span<const double> x, const EncodeConfig& cfg);

// Dispatches on cfg.mode.
ContextualNumber encode(const SomModel& model, std::span<const double> x, const EncodeConfig& cfg);

// Linear interpolation between the two neighbouring integer nodes.
// Throws ErrorKind::range outside [1, K].
std::vector<double> decode(const SomModel& model, ContextualNumber cn);

double p_max(const SomModel& model, std::span<const double> x, double beta);

// 1 / (2 * median squared BMU distance over `data`). Falls back to the mean
// squared distance, then to 1, when the median is zero.
double default_beta(const SomModel& model, const Dataset& data);

// flags[t] is true when the mean of series[t-window+1 .. t] is below
// threshold * baseline. The first window-1 entries are never flagged.
std::vector<bool> drift_monitor(std::span<const double> p_max_series, double threshold, std::size_t window,
                                double baseline);

// Same, with the baseline taken as the mean of the first `baseline_prefix` entries.
std::vector<bool> drift_monitor_with_prefix(std::span<const double> p_max_series, double threshold,
                                            std::size_t window, std::size_t baseline_prefix);

}  // namespace cnf
