#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "filament/curve.hpp"
#include "filament/error.hpp"

namespace testing {

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("filament_lab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

template <class F>
filament::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const filament::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected a filament::Error");
}

inline filament::Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return filament::Vec3(g(rng), g(rng), g(rng)).normalized();
}

}  // namespace testing
