#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "cnforecast/forecast.hpp"
#include "cnforecast/som.hpp"

namespace cnf {

// Text model files:
//
//   cnforecast-model v1
//   kind = som | pipeline
//   [META]   training schedule, seed, rng algorithm, final quantization error
//   [NORM]   pipeline only
//   [SOM]    nodes, dim, then one `w = ...` line per node
//   [AR]     pipeline only
//   [ENCODE] pipeline only
//
// Every real is written in shortest round-trip form, so load(save(m)) == m
// bit for bit and save(load(save(m))) is byte-identical.
inline constexpr int kModelFormatVersion = 1;

enum class ModelKind { som, pipeline };

const char* to_string(ModelKind kind) noexcept;

struct ModelFile {
  int format_version = kModelFormatVersion;
  std::variant<SomModel, CnPipeline> payload;

  ModelKind kind() const noexcept {
    return std::holds_alternative<SomModel>(payload) ? ModelKind::som : ModelKind::pipeline;
  }
};

std::string serialize_model(const SomModel& model);
std::string serialize_model(const CnPipeline& pipeline);

// Throws ErrorKind::integrity naming the first invalid field.
ModelFile parse_model(std::string_view text);

void save_model(const SomModel& model, const std::filesystem::path& path);
void save_model(const CnPipeline& pipeline, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

SomModel load_som(const std::filesystem::path& path);
CnPipeline load_pipeline(const std::filesystem::path& path);

}  // namespace cnf
