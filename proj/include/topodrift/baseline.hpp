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

#ifndef TOPODRIFT_BASELINE_HPP_
#define TOPODRIFT_BASELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "topodrift/detector.hpp"
#include "topodrift/matrix.hpp"
#include "topodrift/stream.hpp"

namespace topodrift {

// Linear PCA projection used as the comparison pipeline.
struct PcaModel {
  std::vector<double> mean;                 // length p
  Matrix components;                        // k x p, orthonormal rows
  std::vector<double> explained_variance;   // length k, descending
};

// Power iteration with deflation on the sample covariance. Throws when a
// requested component has (numerically) zero variance.
PcaModel fit_pca(const Matrix& data, std::size_t k, std::size_t max_iters = 1000,
                 double tol = 1e-10, std::uint64_t seed = 0);

// n x k latent coordinates.
Matrix project(const PcaModel& model, const Matrix& chunk);

// Max over latent components of the sup-distance between the two empirical
// CDFs, both binned on a shared grid spanning the pooled range.
double cumulative_hist_distance(const Matrix& latent_a, const Matrix& latent_b,
                                std::size_t n_bins);

// Exact two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// ks_statistic per latent component, max taken.
double ks_statistic_latent(const Matrix& latent_a, const Matrix& latent_b);

struct DecisionRule {
  double alpha = 5.0;
  std::size_t window = 8;
};

struct BaselineSignals {
  MonitorSignal histogram;
  MonitorSignal ks;
};

// Scores every chunk against its predecessor in the latent space. Bounds and
// shift flags are only filled when a decision rule is supplied.
BaselineSignals run_baseline(ChunkSource& stream, const PcaModel& model, std::size_t n_bins,
                             std::optional<DecisionRule> rule = std::nullopt);

}  // namespace topodrift

#endif  // TOPODRIFT_BASELINE_HPP_
