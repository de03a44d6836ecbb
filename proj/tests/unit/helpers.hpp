#pragma once

#include <doctest.h>

#include <filesystem>
#include <string>

#include <unistd.h>

#include "cnforecast/core.hpp"

// Runs `expr` and checks it throws cnf::Error of the given kind.
#define CHECK_ERROR_KIND(expr, k)                                  \
  do {                                                             \
    bool thrown_ = false;                                          \
    try {                                                          \
      (void)(expr);                                                \
    } catch (const cnf::Error& e_) {                               \
      thrown_ = true;                                              \
      CHECK_MESSAGE(e_.kind() == (k), "kind was ", cnf::to_string(e_.kind()), ": ", e_.what()); \
    }                                                              \
    CHECK_MESSAGE(thrown_, "expected an error from " #expr);       \
  } while (0)

inline cnf::Dataset ds(std::initializer_list<std::initializer_list<double>> rows) {
  cnf::Matrix m;
  for (auto r : rows) m.append_row(std::vector<double>(r));
  return cnf::Dataset(std::move(m));
}

inline cnf::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  cnf::Matrix m;
  for (auto r : rows) m.append_row(std::vector<double>(r));
  return m;
}

// Fresh scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("cnf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};
