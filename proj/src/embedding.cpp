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

#include "topodrift/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "topodrift/format.hpp"

namespace topodrift {

DistanceMatrix distance_matrix(const FeatureMap& map, std::span<const double> x) {
  require(x.size() == map.input_dim(), ErrorCode::kDimensionMismatch,
          "sample length does not match map input dimension");
  DistanceMatrix d{map.grid().rows(), map.grid().cols(), {}};
  d.values.resize(map.neuron_count());
  for (std::size_t i = 0; i < map.neuron_count(); ++i) {
    const auto w = map.weight(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double diff = x[k] - w[k];
      acc += diff * diff;
    }
    d.values[i] = std::sqrt(acc);
  }
  return d;
}

MomentVector compute_moments(std::span<const double> values) {
  require(!values.empty(), ErrorCode::kEmptyInput, "moments of an empty sequence");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;

  double c2 = 0.0, c3 = 0.0, c4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    const double d2 = d * d;
    c2 += d2;
    c3 += d2 * d;
    c4 += d2 * d2;
  }
  c2 /= n;
  c3 /= n;
  c4 /= n;

  MomentVector m{mean, c2, 0.0, 0.0};
  if (c2 >= kVarianceFloor) {
    m.skewness = c3 / std::pow(c2, 1.5);
    m.kurtosis = c4 / (c2 * c2);
  }
  return m;
}

double sample_statistic(const FeatureMap& map, std::span<const double> x) {
  const auto d = distance_matrix(map, x);
  double acc = 0.0;
  for (double v : d.values) acc += v;
  return acc / static_cast<double>(d.values.size());
}

GaussianSummary fit_gaussian(std::span<const double> statistics) {
  require(statistics.size() >= 2, ErrorCode::kInvalidArgument,
          "a Gaussian fit needs at least two values");
  const double n = static_cast<double>(statistics.size());
  double mean = 0.0;
  for (double v : statistics) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : statistics) ss += (v - mean) * (v - mean);
  return {mean, std::max(ss / (n - 1.0), kVarianceFloor), statistics.size()};
}

GaussianSummary chunk_summary(const FeatureMap& map, const Matrix& chunk) {
  require(chunk.rows() >= 2, ErrorCode::kInvalidArgument, "chunk must hold at least two samples");
  std::vector<double> stats(chunk.rows());
  for (std::size_t r = 0; r < chunk.rows(); ++r) stats[r] = sample_statistic(map, chunk.row(r));
  return fit_gaussian(stats);
}

std::vector<MomentVector> chunk_moments(const FeatureMap& map, const Matrix& chunk) {
  std::vector<MomentVector> out;
  out.reserve(chunk.rows());
  for (std::size_t r = 0; r < chunk.rows(); ++r) {
    out.push_back(compute_moments(distance_matrix(map, chunk.row(r)).values));
  }
  return out;
}

void write_moments_csv(std::ostream& out, std::span<const MomentRecord> records) {
  out << "chunk_index,m1,m2,m3,m4\n";
  for (const auto& r : records) {
    out << r.chunk_index << ',' << format_double(r.moments.mean) << ','
        << format_double(r.moments.variance) << ',' << format_double(r.moments.skewness) << ','
        << format_double(r.moments.kurtosis) << '\n';
  }
}

}  // namespace topodrift
