#pragma once

#include <cstdint>
#include <string>

#include "cnforecast/core.hpp"

namespace cnf {

enum class InitMode { linear, random_sample };

const char* to_string(InitMode mode) noexcept;
InitMode parse_init_mode(const std::string& text);

struct TrainConfig {
  std::size_t nodes = 0;  // K
  std::size_t epochs = 0;
  double radius_start = 0.0;
  double radius_end = 1.0;
  std::uint64_t seed = 42;
  InitMode init = InitMode::linear;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Defaults for a K-node map on N observations:
//   epochs = 2 * ceil(10 K / N) + 10, radius from max(K/8, 1) down to 1.
TrainConfig default_train_config(std::size_t nodes, std::size_t observations, std::uint64_t seed = 42);

// Throws ErrorKind::config when the schedule is invalid.
void validate(const TrainConfig& cfg);

struct TrainingMeta {
  TrainConfig config;
  double final_quantization_error = 0.0;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

// One-dimensional map: node j (1-based) owns weight row j-1.
class SomModel {
 public:
  SomModel(Matrix weights, TrainingMeta meta = {});

  std::size_t nodes() const noexcept { return weights_.rows(); }
  std::size_t dim() const noexcept { return weights_.cols(); }

  // 1-based node index.
  std::span<const double> weight(std::size_t node) const noexcept { return weights_.row(node - 1); }
  const Matrix& weights() const noexcept { return weights_; }
  const TrainingMeta& meta() const noexcept { return meta_; }

  friend bool operator==(const SomModel&, const SomModel&) = default;

 private:
  Matrix weights_;
  TrainingMeta meta_;
};

Matrix init_weights(const Dataset& data, const TrainConfig& cfg);

// Gaussian kernel over index distance: exp(-(i-j)^2 / (2 r^2)).
double neighborhood(std::size_t i, std::size_t j, double radius);

// Index (1-based) of the nearest weight row; ties go to the lowest index.
std::size_t best_matching_unit(const Matrix& weights, std::span<const double> x);
std::size_t best_matching_unit(const SomModel& model, std::span<const double> x);

// One batch update. Nodes whose kernel mass is below 1e-300 keep their weight.
Matrix batch_epoch(const Matrix& weights, const Dataset& data, double radius);

// Radius used in epoch e (0-based) of a geometric schedule.
double scheduled_radius(const TrainConfig& cfg, std::size_t epoch);

SomModel train(const Dataset& data, const TrainConfig& cfg);

double quantization_error(const Matrix& weights, const Dataset& data);
double quantization_error(const SomModel& model, const Dataset& data);

Matrix pairwise_weight_distances(const SomModel& model);

// Fraction of index triples (i, j, k), j != i, |i-j| < |i-k|, for which
// ||w_i - w_j|| < ||w_i - w_k||. Enumerates every triple when K^3 <= 1e6,
// otherwise samples `sample_size` triples.
double ordering_score(const SomModel& model, std::size_t sample_size, std::uint64_t seed);

}  // namespace cnf
