#include "cnforecast/core.hpp"

#include <cmath>

namespace cnf {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::contract: return "contract violation";
    case ErrorKind::config: return "configuration error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::range: return "range error";
    case ErrorKind::integrity: return "integrity error";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::degenerate: return "degenerate reference";
    case ErrorKind::numeric: return "numeric failure";
  }
  return "unknown error";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  require(data_.size() == rows_ * cols_, "matrix storage does not match its shape");
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  require(values.size() == cols_, "appended row has the wrong dimension");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Dataset::Dataset(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0) fail(ErrorKind::contract, "dataset must contain at least one observation");
  if (values_.cols() == 0) fail(ErrorKind::contract, "dataset dimension must be at least 1");
  for (std::size_t i = 0; i < values_.rows(); ++i) {
    for (std::size_t k = 0; k < values_.cols(); ++k) {
      if (!std::isfinite(values_(i, k))) {
        fail(ErrorKind::contract, "dataset entry at row " + std::to_string(i + 1) + ", column " +
                                      std::to_string(k + 1) + " is not finite");
      }
    }
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "vector dimensions differ");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

double norm(std::span<const double> a) {
  double sum = 0.0;
  for (double v : a) sum += v * v;
  return std::sqrt(sum);
}

double relative_error(std::span<const double> est, std::span<const double> real) {
  require(est.size() == real.size(), "vector dimensions differ");
  const double denom = norm(real);
  if (denom == 0.0) fail(ErrorKind::degenerate, "relative error undefined for a zero-norm reference vector");
  return euclidean_distance(est, real) / denom;
}

}  // namespace cnf
