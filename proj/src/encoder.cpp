#include "cnforecast/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cnf {

namespace {
constexpr double kFlushBelow = 1e-300;
}

const char* to_string(EncodeMode mode) noexcept { return mode == EncodeMode::argmax ? "argmax" : "weighted"; }

EncodeMode parse_encode_mode(const std::string& text) {
  if (text == "argmax") return EncodeMode::argmax;
  if (text == "weighted") return EncodeMode::weighted;
  fail(ErrorKind::config, "unknown encode mode '" + text + "'");
}

void validate(const EncodeConfig& cfg, std::size_t nodes) {
  if (cfg.g < 1 || cfg.g > nodes) fail(ErrorKind::config, "g must lie in [1, K]");
  if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta)) fail(ErrorKind::config, "beta must be positive and finite");
}

double similarity(std::span<const double> w, std::span<const double> x, double beta) {
  require(beta > 0.0, "beta must be positive");
  return -beta * squared_distance(x, w);
}

Posterior posterior(const SomModel& model, std::span<const double> x, double beta) {
  require(x.size() == model.dim(), "query dimension does not match the map");
  const std::size_t nodes = model.nodes();
  Posterior p;
  p.probs.resize(nodes);
  for (std::size_t j = 0; j < nodes; ++j) p.probs[j] = similarity(model.weight(j + 1), x, beta);

  const double peak = *std::ranges::max_element(p.probs);
  double total = 0.0;
  for (double& v : p.probs) {
    v = std::exp(v - peak);
    total += v;
  }
  // Only exp(0) = 1 is guaranteed to survive, so total >= 1 here.
  double kept = 0.0;
  for (double& v : p.probs) {
    v /= total;
    if (v < kFlushBelow) v = 0.0;
    kept += v;
  }
  for (double& v : p.probs) v /= kept;
  return p;
}

ContextualNumber encode_argmax(const SomModel& model, std::span<const double> x, double beta) {
  require(beta > 0.0, "beta must be positive");
  // The softmax is monotone in -distance, so its argmax is the BMU; working
  // on distances directly avoids ties introduced by exp underflow.
  return {static_cast<double>(best_matching_unit(model, x))};
}

WeightedCode encode_weighted(const SomModel& model, std::span<const double> x, const EncodeConfig& cfg) {
  validate(cfg, model.nodes());
  if (cfg.g == 1) return {encode_argmax(model, x, cfg.beta), false};

  const Posterior p = posterior(model, x, cfg.beta);
  std::vector<double> dist(model.nodes());
  for (std::size_t j = 0; j < model.nodes(); ++j) dist[j] = squared_distance(model.weight(j + 1), x);

  std::vector<std::size_t> order(model.nodes());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Rank by posterior, breaking exact ties (including underflowed zeros) by
  // distance and then by lower index.
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    if (p.probs[a] != p.probs[b]) return p.probs[a] > p.probs[b];
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });
  order.resize(cfg.g);

  double mass = 0.0;
  double weighted = 0.0;
  for (std::size_t j : order) {
    mass += p.probs[j];
    weighted += p.probs[j] * static_cast<double>(j + 1);
  }
  std::ranges::sort(order);
  const bool noncontiguous = order.back() - order.front() + 1 != order.size();

  if (mass == 0.0) return {{static_cast<double>(order.front() + 1)}, noncontiguous};
  double value = weighted / mass;
  value = std::clamp(value, static_cast<double>(order.front() + 1), static_cast<double>(order.back() + 1));
  return {{value}, noncontiguous};
}

ContextualNumber encode(const SomModel& model, std::span<const double> x, const EncodeConfig& cfg) {
  if (cfg.mode == EncodeMode::argmax) return encode_argmax(model, x, cfg.beta);
  return encode_weighted(model, x, cfg).cn;
}

std::vector<double> decode(const SomModel& model, ContextualNumber cn) {
  const double top = static_cast<double>(model.nodes());
  if (!(cn.value >= 1.0 && cn.value <= top)) {
    fail(ErrorKind::range, "contextual number " + std::to_string(cn.value) + " outside [1, " +
                               std::to_string(model.nodes()) + "]");
  }
  const double base = std::floor(cn.value);
  const auto j = static_cast<std::size_t>(base);
  const auto lo = model.weight(j);
  if (cn.value == base) return {lo.begin(), lo.end()};

  const double t = cn.value - base;
  const auto hi = model.weight(j + 1);
  std::vector<double> out(model.dim());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - t) * lo[k] + t * hi[k];
  return out;
}

double p_max(const SomModel& model, std::span<const double> x, double beta) {
  const Posterior p = posterior(model, x, beta);
  return *std::ranges::max_element(p.probs);
}

double default_beta(const SomModel& model, const Dataset& data) {
  require(data.dim() == model.dim(), "data dimension does not match the map");
  std::vector<double> sq(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    sq[i] = squared_distance(model.weight(best_matching_unit(model, x)), x);
  }
  const std::size_t mid = sq.size() / 2;
  std::ranges::nth_element(sq, sq.begin() + static_cast<std::ptrdiff_t>(mid));
  double median = sq[mid];
  if (sq.size() % 2 == 0) {
    const double lower = *std::max_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  if (median > 0.0) return 1.0 / (2.0 * median);
  const double mean = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(sq.size());
  if (mean > 0.0) return 1.0 / (2.0 * mean);
  return 1.0;
}

std::vector<bool> drift_monitor(std::span<const double> p_max_series, double threshold, std::size_t window,
                                double baseline) {
  require(!p_max_series.empty(), "drift_monitor: empty series");
  require(threshold > 0.0 && threshold < 1.0, "drift_monitor: threshold must lie in (0, 1)");
  require(window >= 1, "drift_monitor: window must be at least 1");
  const double limit = threshold * baseline;
  std::vector<bool> flags(p_max_series.size(), false);
  for (std::size_t t = window - 1; t < p_max_series.size(); ++t) {
    double sum = 0.0;
    for (std::size_t u = t + 1 - window; u <= t; ++u) sum += p_max_series[u];
    flags[t] = sum / static_cast<double>(window) < limit;
  }
  return flags;
}

std::vector<bool> drift_monitor_with_prefix(std::span<const double> p_max_series, double threshold,
                                            std::size_t window, std::size_t baseline_prefix) {
  require(baseline_prefix >= 1 && baseline_prefix <= p_max_series.size(),
          "drift_monitor: baseline prefix must lie within the series");
  const double baseline =
      std::accumulate(p_max_series.begin(), p_max_series.begin() + static_cast<std::ptrdiff_t>(baseline_prefix),
                      0.0) /
      static_cast<double>(baseline_prefix);
  return drift_monitor(p_max_series, threshold, window, baseline);
}

}  // namespace cnf
