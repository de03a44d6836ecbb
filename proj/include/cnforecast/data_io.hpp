#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>

#include "cnforecast/core.hpp"

namespace cnf {

// CSV matrices: comma separated, '\n' line endings, an optional first line
// starting with '#' is a comment. Numbers use '.' regardless of locale.
Dataset parse_matrix(std::string_view text);
Dataset load_matrix(const std::filesystem::path& path);

// Shortest round-trip decimal rendering, one row per line.
std::string format_matrix(const Matrix& data, std::string_view header = {});
void save_matrix(const Dataset& data, const std::filesystem::path& path, std::string_view header = {});

std::string format_double(double v);
// Whole-string parse; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

NormalizationParams normalize_fit(const Dataset& data, NormalizationMode mode);
Matrix normalize_apply(const NormalizationParams& params, const Matrix& data);
Matrix normalize_invert(const NormalizationParams& params, const Matrix& data);
Dataset normalize_apply(const NormalizationParams& params, const Dataset& data);
Dataset normalize_invert(const NormalizationParams& params, const Dataset& data);
std::vector<double> normalize_apply(const NormalizationParams& params, std::span<const double> x);
std::vector<double> normalize_invert(const NormalizationParams& params, std::span<const double> x);

const char* to_string(NormalizationMode mode) noexcept;
NormalizationMode parse_normalization_mode(const std::string& text);

struct SplitSpec {
  std::size_t train_count = 1;
};

std::pair<Dataset, Dataset> split_prefix(const Dataset& data, SplitSpec spec);

// Rows [first, last) as a dataset.
Dataset slice_rows(const Dataset& data, std::size_t first, std::size_t last);

Dataset synth_uniform_1d(std::size_t count, double low, double high, std::uint64_t seed);

// Flattened rows x cols field sin(2 pi (c/cols - speed t)) cos(2 pi r/rows)
// plus Gaussian noise, one time step per row.
Dataset synth_traveling_wave(std::size_t rows, std::size_t cols, std::size_t steps, double speed, double noise_sd,
                             std::uint64_t seed);

}  // namespace cnf
