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

#ifndef TOPODRIFT_EMBEDDING_HPP_
#define TOPODRIFT_EMBEDDING_HPP_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "topodrift/matrix.hpp"
#include "topodrift/topo_map.hpp"

namespace topodrift {

inline constexpr double kVarianceFloor = 1e-12;

// Euclidean distance from one sample to every neuron, laid out on the grid.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Population mean, variance, skewness and (non-excess) kurtosis.
// Skewness and kurtosis are reported as zero when the variance is below
// kVarianceFloor.
struct MomentVector {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

struct GaussianSummary {
  double mean = 0.0;
  double variance = 1.0;
  std::size_t count = 0;
};

DistanceMatrix distance_matrix(const FeatureMap& map, std::span<const double> x);

MomentVector compute_moments(std::span<const double> values);

// The monitoring statistic: mean of the sample's distance matrix.
double sample_statistic(const FeatureMap& map, std::span<const double> x);

// Unbiased Gaussian fit of a sequence of statistics, variance floored.
GaussianSummary fit_gaussian(std::span<const double> statistics);

GaussianSummary chunk_summary(const FeatureMap& map, const Matrix& chunk);

// Moments of each sample's distance matrix, one entry per chunk row.
std::vector<MomentVector> chunk_moments(const FeatureMap& map, const Matrix& chunk);

struct MomentRecord {
  std::size_t chunk_index = 0;
  MomentVector moments;
};

// CSV with header chunk_index,m1,m2,m3,m4.
void write_moments_csv(std::ostream& out, std::span<const MomentRecord> records);

}  // namespace topodrift

#endif  // TOPODRIFT_EMBEDDING_HPP_
