#include "cnforecast/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>

#include "cnforecast/rng.hpp"

namespace cnf {

namespace {

constexpr double kConstantColumnStd = 1e-12;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

Dataset parse_matrix(std::string_view text) {
  Matrix values;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::vector<double> row;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    line = trim(line);
    if (line_no == 1 && !line.empty() && line.front() == '#') continue;
    if (line.empty()) continue;

    row.clear();
    std::size_t column = 0;
    while (true) {
      const auto comma = line.find(',');
      const std::string_view cell = line.substr(0, comma);
      ++column;
      double v = 0.0;
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        fail(ErrorKind::parse, "line " + std::to_string(line_no) + ", column " + std::to_string(column) +
                                   ": not a finite number: '" + std::string(trim(cell)) + "'");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (values.rows() == 0) {
      width = row.size();
    } else if (row.size() != width) {
      fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                 " cells, found " + std::to_string(row.size()));
    }
    values.append_row(row);
  }
  if (values.rows() == 0) fail(ErrorKind::parse, "no numeric rows found");
  return Dataset(std::move(values));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset load_matrix(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_matrix(text);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

std::string format_matrix(const Matrix& data, std::string_view header) {
  std::string out;
  if (!header.empty()) {
    out += '#';
    out += header;
    out += '\n';
  }
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto r = data.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) out += ',';
      out += format_double(r[k]);
    }
    out += '\n';
  }
  return out;
}

void save_matrix(const Dataset& data, const std::filesystem::path& path, std::string_view header) {
  write_file_atomic(path, format_matrix(data.matrix(), header));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorKind::io, "failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::io, "cannot move output into place at '" + path.string() + "'");
  }
}

const char* to_string(NormalizationMode mode) noexcept {
  return mode == NormalizationMode::none ? "none" : "zscore";
}

NormalizationMode parse_normalization_mode(const std::string& text) {
  if (text == "none") return NormalizationMode::none;
  if (text == "zscore") return NormalizationMode::zscore;
  fail(ErrorKind::config, "unknown normalization mode '" + text + "'");
}

NormalizationParams normalize_fit(const Dataset& data, NormalizationMode mode) {
  const std::size_t n = data.dim();
  NormalizationParams params;
  params.mode = mode;
  params.center.assign(n, 0.0);
  params.scale.assign(n, 1.0);
  params.constant_column.assign(n, false);
  if (mode == NormalizationMode::none) return params;

  if (data.size() < 2) fail(ErrorKind::insufficient_data, "z-score normalization needs at least 2 observations");
  const auto count = static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t k = 0; k < n; ++k) params.center[k] += data.row(i)[k];
  for (double& c : params.center) c /= count;

  std::vector<double> ss(n, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double d = data.row(i)[k] - params.center[k];
      ss[k] += d * d;
    }
  for (std::size_t k = 0; k < n; ++k) {
    const double sd = std::sqrt(ss[k] / count);
    if (sd < kConstantColumnStd) {
      params.scale[k] = 1.0;
      params.constant_column[k] = true;
    } else {
      params.scale[k] = sd;
    }
  }
  return params;
}

std::vector<double> normalize_apply(const NormalizationParams& params, std::span<const double> x) {
  require(x.size() == params.dim(), "normalization dimension mismatch");
  std::vector<double> out(x.begin(), x.end());
  if (params.mode == NormalizationMode::none) return out;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (out[k] - params.center[k]) / params.scale[k];
  return out;
}

std::vector<double> normalize_invert(const NormalizationParams& params, std::span<const double> x) {
  require(x.size() == params.dim(), "normalization dimension mismatch");
  std::vector<double> out(x.begin(), x.end());
  if (params.mode == NormalizationMode::none) return out;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = out[k] * params.scale[k] + params.center[k];
  return out;
}

Matrix normalize_apply(const NormalizationParams& params, const Matrix& data) {
  require(data.cols() == params.dim(), "normalization dimension mismatch");
  Matrix out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto r = normalize_apply(params, data.row(i));
    std::ranges::copy(r, out.row(i).begin());
  }
  return out;
}

Matrix normalize_invert(const NormalizationParams& params, const Matrix& data) {
  require(data.cols() == params.dim(), "normalization dimension mismatch");
  Matrix out(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto r = normalize_invert(params, data.row(i));
    std::ranges::copy(r, out.row(i).begin());
  }
  return out;
}

Dataset normalize_apply(const NormalizationParams& params, const Dataset& data) {
  return Dataset(normalize_apply(params, data.matrix()));
}

Dataset normalize_invert(const NormalizationParams& params, const Dataset& data) {
  return Dataset(normalize_invert(params, data.matrix()));
}

Dataset slice_rows(const Dataset& data, std::size_t first, std::size_t last) {
  require(first < last && last <= data.size(), "row slice out of range");
  const auto values = data.matrix().values();
  const std::size_t n = data.dim();
  std::vector<double> out(values.begin() + static_cast<std::ptrdiff_t>(first * n),
                          values.begin() + static_cast<std::ptrdiff_t>(last * n));
  return Dataset(Matrix(last - first, n, std::move(out)));
}

std::pair<Dataset, Dataset> split_prefix(const Dataset& data, SplitSpec spec) {
  if (spec.train_count < 1 || spec.train_count >= data.size()) {
    fail(ErrorKind::config, "train_count must lie in [1, N) (train_count=" + std::to_string(spec.train_count) +
                                ", N=" + std::to_string(data.size()) + ")");
  }
  return {slice_rows(data, 0, spec.train_count), slice_rows(data, spec.train_count, data.size())};
}

Dataset synth_uniform_1d(std::size_t count, double low, double high, std::uint64_t seed) {
  if (count < 1) fail(ErrorKind::config, "count must be at least 1");
  if (!(low < high)) fail(ErrorKind::config, "low must be below high");
  Rng rng(seed);
  Matrix out(count, 1);
  for (std::size_t i = 0; i < count; ++i) out(i, 0) = rng.uniform(low, high);
  return Dataset(std::move(out));
}

Dataset synth_traveling_wave(std::size_t rows, std::size_t cols, std::size_t steps, double speed, double noise_sd,
                             std::uint64_t seed) {
  if (rows * cols < 2) fail(ErrorKind::config, "the field needs at least 2 cells");
  if (steps < 2) fail(ErrorKind::config, "steps must be at least 2");
  if (!(noise_sd >= 0.0) || !std::isfinite(speed)) fail(ErrorKind::config, "invalid wave parameters");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Rng rng(seed);
  Matrix out(steps, rows * cols);
  for (std::size_t t = 0; t < steps; ++t) {
    // Reduce the travelled distance modulo 1 first so whole periods wrap exactly.
    const double travelled = speed * static_cast<double>(t);
    const double shift = travelled - std::floor(travelled);
    for (std::size_t r = 0; r < rows; ++r) {
      const double vertical = std::cos(two_pi * static_cast<double>(r) / static_cast<double>(rows));
      for (std::size_t c = 0; c < cols; ++c) {
        const double phase = static_cast<double>(c) / static_cast<double>(cols) - shift;
        double v = std::sin(two_pi * phase) * vertical;
        if (noise_sd > 0.0) v += noise_sd * rng.normal();
        out(t, r * cols + c) = v;
      }
    }
  }
  return Dataset(std::move(out));
}

}  // namespace cnf
