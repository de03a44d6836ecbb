#pragma once

#include <cstdint>
#include <random>

namespace cnf {

// Portable seeded generator. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the conversions below are written
// out by hand because the standard distributions are implementation-defined.
class Rng {
 public:
  static constexpr const char* algorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01();

  // Uniform in [low, high).
  double uniform(double low, double high);

  // Uniform integer in [low, high], rejection sampled (no modulo bias).
  std::int64_t uniform_int(std::int64_t low, std::int64_t high);

  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cnf
