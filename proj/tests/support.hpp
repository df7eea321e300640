// Copyright 2026 The topodrift Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOPODRIFT_TESTS_SUPPORT_HPP_
#define TOPODRIFT_TESTS_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "topodrift/matrix.hpp"
#include "topodrift/stream.hpp"

namespace topodrift::testing {

// Random cases per property.
inline constexpr int kCases = 500;

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                            double lo = -3.0, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -3.0,
                                         double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline Matrix gaussian_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                              double mean = 0.0, double sd = 1.0) {
  std::normal_distribution<double> n(mean, sd);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = n(rng);
  return m;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("topodrift-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// A regime with every feature at the same mean and standard deviation.
inline Regime flat_regime(std::size_t p, double mean, double sd, std::size_t duration) {
  Regime r;
  r.mean.assign(p, mean);
  r.stddev.assign(p, sd);
  r.duration = duration;
  return r;
}

}  // namespace topodrift::testing

#endif  // TOPODRIFT_TESTS_SUPPORT_HPP_
