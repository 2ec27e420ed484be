#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "iidgan/matrix.hpp"
#include "iidgan/rng.hpp"

namespace test_util {

inline iidgan::Matrix random_matrix(std::size_t r, std::size_t c, iidgan::Rng& rng,
                                    double scale = 1.0) {
  iidgan::Matrix m(r, c);
  for (auto& v : m.values()) v = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

inline iidgan::Matrix random_spd(std::size_t n, iidgan::Rng& rng, double ridge = 0.1) {
  const iidgan::Matrix a = random_matrix(n, n, rng);
  iidgan::Matrix s = iidgan::matmul_bt(a, a);
  for (std::size_t i = 0; i < n; ++i) s(i, i) += ridge;
  return s;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("iidgan_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace test_util
