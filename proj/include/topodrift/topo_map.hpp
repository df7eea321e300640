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

#ifndef TOPODRIFT_TOPO_MAP_HPP_
#define TOPODRIFT_TOPO_MAP_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "topodrift/matrix.hpp"

namespace topodrift {

enum class GridMetric { kManhattan, kEuclidean, kChebyshev };
enum class MapKind { kSom, kSim };
enum class NeighborhoodKind { kGaussian, kDifferenceOfGaussians };

std::string_view to_string(GridMetric metric);
std::string_view to_string(MapKind kind);
std::string_view to_string(NeighborhoodKind kind);
GridMetric parse_grid_metric(std::string_view text);
MapKind parse_map_kind(std::string_view text);
NeighborhoodKind parse_neighborhood_kind(std::string_view text);

struct GridPos {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const GridPos&) const = default;
};

// Rectangular lattice of neurons; neuron indices are row-major.
class GridSpec {
 public:
  GridSpec(std::size_t rows, std::size_t cols, GridMetric metric = GridMetric::kManhattan);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }
  GridMetric metric() const noexcept { return metric_; }

  GridPos position(std::size_t index) const { return {index / cols_, index % cols_}; }
  std::size_t index(GridPos pos) const { return pos.row * cols_ + pos.col; }

  // Lattice distance between two neuron positions under the grid metric.
  double distance(GridPos a, GridPos b) const;

  bool operator==(const GridSpec&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  GridMetric metric_;
};

// Learning-rate and neighborhood-radius schedule. Both decay exponentially
// from their start to their end value over the fraction of presentations
// seen so far: v(t) = start * (end / start)^t.
struct TrainSchedule {
  std::size_t epochs = 20;
  double eta_start = 0.5;
  double eta_end = 0.01;
  double sigma_start = 3.0;
  double sigma_end = 0.5;
  NeighborhoodKind neighborhood = NeighborhoodKind::kGaussian;
  double dog_ratio = 1.6;
  double dog_amplitude = 0.5;

  void validate() const;
  double eta_at(double t_frac) const;
  double sigma_at(double t_frac) const;
};

// h(z) for a lattice distance z. The distance enters the exponent
// unsquared: h(z) = exp(-z / (2 sigma^2)).
double neighborhood(double z, const TrainSchedule& sched, double t_frac);

class FeatureMap {
 public:
  // All weights zero.
  FeatureMap(GridSpec grid, MapKind kind, std::size_t input_dim);
  // weights has one row per neuron (row-major grid order).
  FeatureMap(GridSpec grid, MapKind kind, Matrix weights);

  const GridSpec& grid() const noexcept { return grid_; }
  MapKind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return weights_.cols(); }
  std::size_t neuron_count() const noexcept { return weights_.rows(); }

  std::span<const double> weight(std::size_t neuron) const { return weights_.row(neuron); }
  std::span<double> weight(std::size_t neuron) { return weights_.row(neuron); }
  std::span<const double> weight(GridPos pos) const { return weights_.row(grid_.index(pos)); }
  const Matrix& weights() const noexcept { return weights_; }

  bool operator==(const FeatureMap&) const = default;

 private:
  GridSpec grid_;
  MapKind kind_;
  Matrix weights_;
};

// Each neuron takes a uniformly drawn (with replacement) row of the data.
FeatureMap init_map(const GridSpec& grid, MapKind kind, const Matrix& training_rows,
                    std::uint64_t seed);

// Best-matching neuron by Euclidean distance; ties go to the lowest index.
std::size_t find_winner_index(const FeatureMap& map, std::span<const double> x);
GridPos find_winner(const FeatureMap& map, std::span<const double> x);

// w_i += eta * h(d(r_winner, r_i)) * (x - w_i)
void som_update(FeatureMap& map, std::span<const double> x, GridPos winner, double eta,
                const TrainSchedule& sched, double t_frac);

// w_i += eta * h(d(r_winner, r_i)) * (x - w_winner), with w_winner taken
// before the step so every neuron moves along the same direction.
void sim_update(FeatureMap& map, std::span<const double> x, GridPos winner, double eta,
                const TrainSchedule& sched, double t_frac);

// Dispatches to som_update or sim_update by map kind.
void update(FeatureMap& map, std::span<const double> x, GridPos winner, double eta,
            const TrainSchedule& sched, double t_frac);

double quantization_error(const FeatureMap& map, const Matrix& data);

struct TrainResult {
  FeatureMap map;
  std::vector<double> error_history;  // one entry per epoch
};

TrainResult train(FeatureMap map, const Matrix& data, const TrainSchedule& sched,
                  std::uint64_t seed);

// Text format, lossless for every finite double:
//   topodrift-map 1
//   kind <som|sim>
//   grid <rows> <cols> <metric>
//   input_dim <p>
//   <one line of p weights per neuron, row-major>
void save_map(const FeatureMap& map, std::ostream& out);
FeatureMap load_map(std::istream& in);
void save_map_file(const FeatureMap& map, const std::string& path);
FeatureMap load_map_file(const std::string& path);

}  // namespace topodrift

#endif  // TOPODRIFT_TOPO_MAP_HPP_
