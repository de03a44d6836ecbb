#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnf {

// Failure categories. The C API maps each one to a status code and the CLI
// maps status codes to exit codes, so the set is deliberately coarse.
enum class ErrorKind {
  contract,          // precondition violated by the caller (dimension mismatch, bad argument)
  config,            // invalid configuration (K > N for random_sample, train_count >= N, ...)
  parse,             // malformed input file
  io,                // file could not be opened / written
  range,             // contextual number outside [1, K]
  integrity,         // model file failed validation
  insufficient_data, // series or dataset too short for the requested lag
  degenerate,        // zero-norm reference vector
  numeric,           // numerical failure (e.g. every search trial failed)
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool ok, const char* what) {
  if (!ok) fail(ErrorKind::contract, what);
}

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  void append_row(std::span<const double> values);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// N observations of dimension n; every entry finite, N >= 1, n >= 1.
class Dataset {
 public:
  explicit Dataset(Matrix values);

  std::size_t size() const noexcept { return values_.rows(); }
  std::size_t dim() const noexcept { return values_.cols(); }
  std::span<const double> row(std::size_t i) const noexcept { return values_.row(i); }
  const Matrix& matrix() const noexcept { return values_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  Matrix values_;
};

// Real value in [1, K] naming a position on a trained one-dimensional map.
struct ContextualNumber {
  double value = 1.0;
};

struct Posterior {
  std::vector<double> probs;
};

struct ForecastModel {
  double intercept = 0.0;
  std::vector<double> coefficients;  // coefficients[i] multiplies the value i+1 steps back
  bool ridge = false;                // rank-deficient system solved with the ridge fallback

  std::size_t lag() const noexcept { return coefficients.size(); }
  friend bool operator==(const ForecastModel&, const ForecastModel&) = default;
};

enum class NormalizationMode { none, zscore };

struct NormalizationParams {
  NormalizationMode mode = NormalizationMode::none;
  std::vector<double> center;
  std::vector<double> scale;
  std::vector<bool> constant_column;

  std::size_t dim() const noexcept { return center.size(); }
  friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

// ||est - real|| / ||real||; throws ErrorKind::degenerate when ||real|| == 0.
double relative_error(std::span<const double> est, std::span<const double> real);

}  // namespace cnf
