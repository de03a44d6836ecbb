#include "cnforecast/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cnforecast/rng.hpp"

namespace cnf {

namespace {

constexpr double kMinKernelMass = 1e-300;
constexpr std::size_t kPowerIterations = 100;

// Leading principal direction of the centered data by power iteration.
// Returns an empty vector when the data has no spread.
std::vector<double> principal_direction(const Dataset& data, std::span<const double> mean) {
  const std::size_t n = data.dim();
  const std::size_t count = data.size();

  std::size_t start_row = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = squared_distance(data.row(i), mean);
    if (d > best) {
      best = d;
      start_row = i;
    }
  }
  if (best <= 0.0) return {};

  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = data.row(start_row)[k] - mean[k];
  std::vector<double> next(n);
  std::vector<double> centered(n);

  for (std::size_t it = 0; it < kPowerIterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < count; ++i) {
      const auto x = data.row(i);
      double proj = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        centered[k] = x[k] - mean[k];
        proj += centered[k] * v[k];
      }
      for (std::size_t k = 0; k < n; ++k) next[k] += proj * centered[k];
    }
    const double len = norm(next);
    if (len == 0.0) return {};
    double change = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      next[k] /= len;
      change += std::abs(next[k] - v[k]);
    }
    v.swap(next);
    if (change < 1e-12) break;
  }

  // Sign convention: the largest-magnitude component is positive.
  std::size_t lead = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs(v[k]) > std::abs(v[lead])) lead = k;
  }
  if (v[lead] < 0.0) {
    for (double& c : v) c = -c;
  }
  return v;
}

}  // namespace

const char* to_string(InitMode mode) noexcept {
  return mode == InitMode::linear ? "linear" : "random_sample";
}

InitMode parse_init_mode(const std::string& text) {
  if (text == "linear") return InitMode::linear;
  if (text == "random_sample" || text == "random-sample") return InitMode::random_sample;
  fail(ErrorKind::config, "unknown init mode '" + text + "'");
}

TrainConfig default_train_config(std::size_t nodes, std::size_t observations, std::uint64_t seed) {
  require(observations > 0, "default_train_config: no observations");
  TrainConfig cfg;
  cfg.nodes = nodes;
  const std::size_t ratio = (10 * nodes + observations - 1) / observations;
  cfg.epochs = 2 * ratio + 10;
  cfg.radius_start = std::max(static_cast<double>(nodes) / 8.0, 1.0);
  cfg.radius_end = 1.0;
  cfg.seed = seed;
  cfg.init = InitMode::linear;
  return cfg;
}

void validate(const TrainConfig& cfg) {
  if (cfg.nodes < 2) fail(ErrorKind::config, "a map needs at least 2 nodes");
  if (cfg.epochs < 1) fail(ErrorKind::config, "training needs at least 1 epoch");
  if (!(cfg.radius_end > 0.0) || !std::isfinite(cfg.radius_start))
    fail(ErrorKind::config, "radius_end must be positive");
  if (!(cfg.radius_start >= cfg.radius_end)) fail(ErrorKind::config, "radius_start must be >= radius_end");
}

SomModel::SomModel(Matrix weights, TrainingMeta meta) : weights_(std::move(weights)), meta_(std::move(meta)) {
  require(weights_.rows() >= 2, "a map needs at least 2 nodes");
  require(weights_.cols() >= 1, "weight dimension must be at least 1");
  for (double v : weights_.values()) require(std::isfinite(v), "weight entries must be finite");
}

Matrix init_weights(const Dataset& data, const TrainConfig& cfg) {
  validate(cfg);
  const std::size_t count = data.size();
  const std::size_t n = data.dim();
  const std::size_t nodes = cfg.nodes;
  if (count < 2) fail(ErrorKind::config, "initialization needs at least 2 observations");

  Matrix weights(nodes, n);
  if (cfg.init == InitMode::random_sample) {
    if (nodes > count) {
      fail(ErrorKind::config, "random_sample init needs K <= N (K=" + std::to_string(nodes) +
                                  ", N=" + std::to_string(count) + ")");
    }
    // Partial Fisher-Yates over row indices.
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(cfg.seed);
    for (std::size_t j = 0; j < nodes; ++j) {
      const auto pick = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(j),
                                                                 static_cast<std::int64_t>(count - 1)));
      std::swap(order[j], order[pick]);
      std::ranges::copy(data.row(order[j]), weights.row(j).begin());
    }
    return weights;
  }

  std::vector<double> mean(n, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const auto x = data.row(i);
    for (std::size_t k = 0; k < n; ++k) mean[k] += x[k];
  }
  for (double& m : mean) m /= static_cast<double>(count);

  const auto direction = principal_direction(data, mean);
  double sigma = 0.0;
  if (!direction.empty()) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      double proj = 0.0;
      const auto x = data.row(i);
      for (std::size_t k = 0; k < n; ++k) proj += (x[k] - mean[k]) * direction[k];
      sum += proj;
      sum_sq += proj * proj;
    }
    const double avg = sum / static_cast<double>(count);
    sigma = std::sqrt(std::max(sum_sq / static_cast<double>(count) - avg * avg, 0.0));
  }

  for (std::size_t j = 0; j < nodes; ++j) {
    auto w = weights.row(j);
    if (sigma == 0.0) {
      std::ranges::copy(mean, w.begin());
      continue;
    }
    const double offset = -2.0 * sigma + 4.0 * sigma * static_cast<double>(j) / static_cast<double>(nodes - 1);
    for (std::size_t k = 0; k < n; ++k) w[k] = mean[k] + offset * direction[k];
  }
  return weights;
}

double neighborhood(std::size_t i, std::size_t j, double radius) {
  require(radius > 0.0, "neighborhood radius must be positive");
  const double diff = static_cast<double>(i) - static_cast<double>(j);
  return std::exp(-(diff * diff) / (2.0 * radius * radius));
}

std::size_t best_matching_unit(const Matrix& weights, std::span<const double> x) {
  require(weights.cols() == x.size(), "query dimension does not match the map");
  require(weights.rows() >= 1, "map has no nodes");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < weights.rows(); ++j) {
    const double d = squared_distance(weights.row(j), x);
    if (d < best_dist) {
      best_dist = d;
      best = j;
    }
  }
  return best + 1;
}

std::size_t best_matching_unit(const SomModel& model, std::span<const double> x) {
  return best_matching_unit(model.weights(), x);
}

Matrix batch_epoch(const Matrix& weights, const Dataset& data, double radius) {
  require(radius > 0.0, "batch_epoch radius must be positive");
  require(weights.cols() == data.dim(), "data dimension does not match the map");
  const std::size_t nodes = weights.rows();
  const std::size_t n = weights.cols();

  std::vector<double> kernel(nodes * nodes);
  for (std::size_t b = 0; b < nodes; ++b)
    for (std::size_t j = 0; j < nodes; ++j) kernel[b * nodes + j] = neighborhood(b + 1, j + 1, radius);

  Matrix numer(nodes, n);
  std::vector<double> denom(nodes, 0.0);
  // Rows are accumulated in ascending order so every node's sums are
  // formed in the same sequence on every run. Offsets from the current weight
  // are summed rather than raw values, so a node sitting on its data stays put.
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    const std::size_t b = best_matching_unit(weights, x) - 1;
    const double* h = kernel.data() + b * nodes;
    for (std::size_t j = 0; j < nodes; ++j) {
      if (h[j] == 0.0) continue;
      denom[j] += h[j];
      auto acc = numer.row(j);
      const auto wj = weights.row(j);
      for (std::size_t k = 0; k < n; ++k) acc[k] += h[j] * (x[k] - wj[k]);
    }
  }

  Matrix next = weights;
  for (std::size_t j = 0; j < nodes; ++j) {
    if (denom[j] < kMinKernelMass) continue;
    auto w = next.row(j);
    const auto acc = numer.row(j);
    for (std::size_t k = 0; k < n; ++k) w[k] += acc[k] / denom[j];
  }
  return next;
}

double scheduled_radius(const TrainConfig& cfg, std::size_t epoch) {
  if (cfg.epochs <= 1) return cfg.radius_end;
  const double t = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
  return cfg.radius_start * std::pow(cfg.radius_end / cfg.radius_start, t);
}

SomModel train(const Dataset& data, const TrainConfig& cfg) {
  validate(cfg);
  if (data.size() < 2) fail(ErrorKind::insufficient_data, "training needs at least 2 observations");
  Matrix weights = init_weights(data, cfg);
  for (std::size_t e = 0; e < cfg.epochs; ++e) weights = batch_epoch(weights, data, scheduled_radius(cfg, e));
  TrainingMeta meta{cfg, quantization_error(weights, data)};
  return SomModel(std::move(weights), meta);
}

double quantization_error(const Matrix& weights, const Dataset& data) {
  require(weights.cols() == data.dim(), "data dimension does not match the map");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    const std::size_t b = best_matching_unit(weights, x);
    total += euclidean_distance(weights.row(b - 1), x);
  }
  return total / static_cast<double>(data.size());
}

double quantization_error(const SomModel& model, const Dataset& data) {
  return quantization_error(model.weights(), data);
}

Matrix pairwise_weight_distances(const SomModel& model) {
  const std::size_t nodes = model.nodes();
  Matrix dist(nodes, nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = i + 1; j < nodes; ++j) {
      const double d = euclidean_distance(model.weights().row(i), model.weights().row(j));
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

double ordering_score(const SomModel& model, std::size_t sample_size, std::uint64_t seed) {
  const std::size_t nodes = model.nodes();
  require(nodes >= 3, "ordering_score needs at least 3 nodes");
  const Matrix dist = pairwise_weight_distances(model);
  auto index_gap = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };

  const double cube = static_cast<double>(nodes) * static_cast<double>(nodes) * static_cast<double>(nodes);
  std::size_t hits = 0;
  std::size_t total = 0;
  if (cube <= 1e6) {
    for (std::size_t i = 0; i < nodes; ++i)
      for (std::size_t j = 0; j < nodes; ++j) {
        if (j == i) continue;
        for (std::size_t k = 0; k < nodes; ++k) {
          if (index_gap(i, j) >= index_gap(i, k)) continue;
          ++total;
          if (dist(i, j) < dist(i, k)) ++hits;
        }
      }
  } else {
    require(sample_size >= 1, "ordering_score needs a positive sample size");
    Rng rng(seed);
    const auto top = static_cast<std::int64_t>(nodes - 1);
    while (total < sample_size) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, top));
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, top));
      const auto k = static_cast<std::size_t>(rng.uniform_int(0, top));
      if (j == i || index_gap(i, j) >= index_gap(i, k)) continue;
      ++total;
      if (dist(i, j) < dist(i, k)) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace cnf
