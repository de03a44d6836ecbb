#include "cnforecast/model_file.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <cmath>
#include <vector>

#include "cnforecast/data_io.hpp"
#include "cnforecast/rng.hpp"

namespace cnf {

namespace {

constexpr std::string_view kMagic = "cnforecast-model v";

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

class Writer {
 public:
  void section(std::string_view name) {
    text_ += '[';
    text_ += name;
    text_ += "]\n";
  }
  void entry(std::string_view key, std::string_view value) {
    text_ += key;
    text_ += " = ";
    text_ += value;
    text_ += '\n';
  }
  void entry(std::string_view key, double value) { entry(key, format_double(value)); }
  void entry(std::string_view key, std::uint64_t value) { entry(key, std::to_string(value)); }
  void entry(std::string_view key, std::span<const double> values) { entry(key, join(values)); }

  std::string take() { return std::move(text_); }

 private:
  std::string text_;
};

void write_meta(Writer& w, const TrainingMeta& meta) {
  w.section("META");
  w.entry("rng", std::string_view(Rng::algorithm));
  w.entry("seed", meta.config.seed);
  w.entry("epochs", static_cast<std::uint64_t>(meta.config.epochs));
  w.entry("radius_schedule", std::string_view("geometric"));
  w.entry("radius_start", meta.config.radius_start);
  w.entry("radius_end", meta.config.radius_end);
  w.entry("init", std::string_view(to_string(meta.config.init)));
  w.entry("final_quantization_error", meta.final_quantization_error);
}

void write_som(Writer& w, const SomModel& model) {
  w.section("SOM");
  w.entry("nodes", static_cast<std::uint64_t>(model.nodes()));
  w.entry("dim", static_cast<std::uint64_t>(model.dim()));
  for (std::size_t j = 1; j <= model.nodes(); ++j) w.entry("w", model.weight(j));
}

// Line cursor that insists on the exact layout produced by the writer.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void bad(const std::string& field, const std::string& why) const {
    fail(ErrorKind::integrity, "model file line " + std::to_string(line_no_) + ", field '" + field + "': " + why);
  }

  std::string_view next_line(const std::string& expecting) {
    if (text_.empty()) {
      ++line_no_;
      bad(expecting, "unexpected end of file");
    }
    const auto eol = text_.find('\n');
    std::string_view line = text_.substr(0, eol);
    text_ = eol == std::string_view::npos ? std::string_view{} : text_.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no_;
    return line;
  }

  void section(std::string_view name) {
    const std::string field = "[" + std::string(name) + "]";
    if (next_line(field) != field) bad(field, "missing section header");
  }

  std::string_view value(std::string_view key, std::string_view label = {}) {
    const std::string field = section_field(label.empty() ? key : label);
    const std::string_view line = next_line(field);
    const std::string prefix = std::string(key) + " = ";
    if (line.substr(0, prefix.size()) != prefix) bad(field, "expected '" + prefix + "...'");
    return line.substr(prefix.size());
  }

  double real(std::string_view key) {
    const std::string_view v = value(key);
    double out = 0.0;
    if (!parse_double(v, out) || !std::isfinite(out)) bad(section_field(key), "invalid number '" + std::string(v) + "'");
    return out;
  }

  std::uint64_t integer(std::string_view key) {
    const std::string_view v = value(key);
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || v.empty())
      bad(section_field(key), "invalid integer '" + std::string(v) + "'");
    return out;
  }

  // expected == 0 accepts any count; `label` overrides the field name in errors.
  std::vector<double> reals(std::string_view key, std::size_t expected, std::string_view label = {}) {
    const std::string field = section_field(label.empty() ? key : label);
    const std::string_view v = value(key, label);
    std::vector<double> out;
    std::string_view rest = v;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = rest.substr(0, comma);
      double x = 0.0;
      if (!parse_double(cell, x) || !std::isfinite(x))
        bad(field, "invalid number '" + std::string(cell) + "' at position " + std::to_string(out.size() + 1));
      out.push_back(x);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (expected != 0 && out.size() != expected)
      bad(field, "expected " + std::to_string(expected) + " values, found " + std::to_string(out.size()));
    return out;
  }

  void set_section(std::string_view name) { current_ = name; }

  void expect_end() {
    while (!text_.empty()) {
      const auto line = next_line("end of file");
      if (!line.empty()) bad("end of file", "unexpected trailing content");
    }
  }

 private:
  std::string section_field(std::string_view key) const { return std::string(current_) + "." + std::string(key); }

  std::string_view text_;
  std::string_view current_ = "header";
  std::size_t line_no_ = 0;
};

TrainingMeta read_meta(Reader& r) {
  r.section("META");
  r.set_section("META");
  if (r.value("rng") != Rng::algorithm) r.bad("META.rng", "unsupported generator");
  TrainingMeta meta;
  meta.config.seed = r.integer("seed");
  meta.config.epochs = r.integer("epochs");
  if (r.value("radius_schedule") != "geometric") r.bad("META.radius_schedule", "unsupported schedule");
  meta.config.radius_start = r.real("radius_start");
  meta.config.radius_end = r.real("radius_end");
  const std::string init(r.value("init"));
  if (init != "linear" && init != "random_sample") r.bad("META.init", "unknown init mode '" + init + "'");
  meta.config.init = parse_init_mode(init);
  meta.final_quantization_error = r.real("final_quantization_error");
  return meta;
}

SomModel read_som(Reader& r, TrainingMeta meta) {
  r.section("SOM");
  r.set_section("SOM");
  const std::size_t nodes = r.integer("nodes");
  const std::size_t dim = r.integer("dim");
  if (nodes < 2) r.bad("SOM.nodes", "a map needs at least 2 nodes");
  if (dim < 1) r.bad("SOM.dim", "dimension must be at least 1");
  Matrix weights(nodes, dim);
  for (std::size_t j = 0; j < nodes; ++j) {
    const auto row = r.reals("w", dim, "w[" + std::to_string(j + 1) + "]");
    std::ranges::copy(row, weights.row(j).begin());
  }
  meta.config.nodes = nodes;
  return SomModel(std::move(weights), meta);
}

}  // namespace

const char* to_string(ModelKind kind) noexcept { return kind == ModelKind::som ? "som" : "pipeline"; }

std::string serialize_model(const SomModel& model) {
  Writer w;
  std::string text = std::string(kMagic) + std::to_string(kModelFormatVersion) + "\n";
  w.entry("kind", std::string_view("som"));
  write_meta(w, model.meta());
  write_som(w, model);
  return text + w.take();
}

std::string serialize_model(const CnPipeline& p) {
  Writer w;
  std::string text = std::string(kMagic) + std::to_string(kModelFormatVersion) + "\n";
  w.entry("kind", std::string_view("pipeline"));
  write_meta(w, p.som.meta());
  w.entry("training_rows", static_cast<std::uint64_t>(p.training_rows));

  w.section("NORM");
  w.entry("mode", std::string_view(to_string(p.norm.mode)));
  w.entry("center", p.norm.center);
  w.entry("scale", p.norm.scale);
  std::vector<double> constant(p.norm.constant_column.begin(), p.norm.constant_column.end());
  w.entry("constant", constant);

  write_som(w, p.som);

  w.section("AR");
  w.entry("lag", static_cast<std::uint64_t>(p.forecaster.lag()));
  w.entry("intercept", p.forecaster.intercept);
  w.entry("coefficients", p.forecaster.coefficients);
  w.entry("ridge", static_cast<std::uint64_t>(p.forecaster.ridge ? 1 : 0));

  w.section("ENCODE");
  w.entry("mode", std::string_view(to_string(p.encode.mode)));
  w.entry("g", static_cast<std::uint64_t>(p.encode.g));
  w.entry("beta", p.encode.beta);
  w.entry("baseline_pmax", p.baseline_pmax);
  return text + w.take();
}

ModelFile parse_model(std::string_view text) {
  Reader r(text);
  const std::string_view first = r.next_line("format_version");
  if (first.substr(0, kMagic.size()) != kMagic) r.bad("format_version", "not a cnforecast model file");
  const std::string_view version_text = first.substr(kMagic.size());
  int version = 0;
  const auto res = std::from_chars(version_text.data(), version_text.data() + version_text.size(), version);
  if (res.ec != std::errc{} || res.ptr != version_text.data() + version_text.size())
    r.bad("format_version", "malformed version '" + std::string(version_text) + "'");
  if (version != kModelFormatVersion)
    r.bad("format_version", "unsupported format_version " + std::to_string(version) + " (this build reads v" +
                                std::to_string(kModelFormatVersion) + ")");

  const std::string kind(r.value("kind"));
  std::optional<std::variant<SomModel, CnPipeline>> payload;
  try {
    if (kind == "som") {
      TrainingMeta meta = read_meta(r);
      payload = read_som(r, meta);
    } else if (kind == "pipeline") {
      TrainingMeta meta = read_meta(r);
      const std::size_t training_rows = r.integer("training_rows");

      r.section("NORM");
      r.set_section("NORM");
      NormalizationParams norm;
      const std::string mode(r.value("mode"));
      if (mode != "none" && mode != "zscore") r.bad("NORM.mode", "unknown mode '" + mode + "'");
      norm.mode = parse_normalization_mode(mode);
      // The dimension is only known from the SOM section, so read leniently
      // here and check the counts afterwards.
      norm.center = r.reals("center", 0);
      const std::size_t dim = norm.center.size();
      norm.scale = r.reals("scale", dim);
      for (double s : norm.scale)
        if (!(s > 0.0)) r.bad("NORM.scale", "scales must be positive");
      for (double c : r.reals("constant", dim)) {
        if (c != 0.0 && c != 1.0) r.bad("NORM.constant", "flags must be 0 or 1");
        norm.constant_column.push_back(c == 1.0);
      }

      SomModel som = read_som(r, meta);
      if (som.dim() != norm.dim()) r.bad("NORM.center", "dimension disagrees with SOM.dim");

      r.section("AR");
      r.set_section("AR");
      ForecastModel ar;
      const std::size_t lag = r.integer("lag");
      if (lag < 1) r.bad("AR.lag", "lag must be at least 1");
      if (lag >= training_rows) r.bad("AR.lag", "lag must be below the training row count");
      ar.intercept = r.real("intercept");
      ar.coefficients = r.reals("coefficients", lag);
      const auto ridge = r.integer("ridge");
      if (ridge > 1) r.bad("AR.ridge", "flag must be 0 or 1");
      ar.ridge = ridge == 1;

      r.section("ENCODE");
      r.set_section("ENCODE");
      EncodeConfig enc;
      const std::string emode(r.value("mode"));
      if (emode != "argmax" && emode != "weighted") r.bad("ENCODE.mode", "unknown mode '" + emode + "'");
      enc.mode = parse_encode_mode(emode);
      enc.g = r.integer("g");
      if (enc.g < 1 || enc.g > som.nodes()) r.bad("ENCODE.g", "g must lie in [1, K]");
      enc.beta = r.real("beta");
      if (!(enc.beta > 0.0)) r.bad("ENCODE.beta", "beta must be positive");
      const double baseline = r.real("baseline_pmax");

      payload = CnPipeline{std::move(som), std::move(ar), std::move(norm), enc, baseline, training_rows};
    } else {
      r.bad("kind", "unknown model kind '" + kind + "'");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::integrity) throw;
    fail(ErrorKind::integrity, std::string("model file: ") + e.what());
  }
  r.expect_end();
  return ModelFile{version, std::move(*payload)};
}

void save_model(const SomModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

void save_model(const CnPipeline& pipeline, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(pipeline));
}

ModelFile load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_model(text);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

SomModel load_som(const std::filesystem::path& path) {
  ModelFile file = load_model(path);
  if (file.kind() != ModelKind::som) fail(ErrorKind::integrity, path.string() + ": expected a som model");
  return std::get<SomModel>(std::move(file.payload));
}

CnPipeline load_pipeline(const std::filesystem::path& path) {
  ModelFile file = load_model(path);
  if (file.kind() != ModelKind::pipeline)
    fail(ErrorKind::integrity, path.string() + ": expected a pipeline model");
  return std::get<CnPipeline>(std::move(file.payload));
}

}  // namespace cnf
