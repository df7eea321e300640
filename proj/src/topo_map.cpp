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

#include "topodrift/topo_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "topodrift/format.hpp"
#include "topodrift/seed.hpp"

namespace topodrift {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

double gaussian_kernel(double z, double sigma) {
  return std::exp(-z / (2.0 * sigma * sigma));
}

double decay(double start, double end, double t_frac) {
  if (start == end || t_frac <= 0.0) return start;
  if (t_frac >= 1.0) return end;
  return start * std::pow(end / start, t_frac);
}

void check_dim(const FeatureMap& map, std::span<const double> x) {
  require(x.size() == map.input_dim(), ErrorCode::kDimensionMismatch,
          "sample length does not match map input dimension");
}

}  // namespace

std::string_view to_string(GridMetric metric) {
  switch (metric) {
    case GridMetric::kManhattan: return "manhattan";
    case GridMetric::kEuclidean: return "euclidean";
    case GridMetric::kChebyshev: return "chebyshev";
  }
  return "manhattan";
}

std::string_view to_string(MapKind kind) { return kind == MapKind::kSom ? "som" : "sim"; }

std::string_view to_string(NeighborhoodKind kind) {
  return kind == NeighborhoodKind::kGaussian ? "gaussian" : "dog";
}

GridMetric parse_grid_metric(std::string_view text) {
  if (text == "manhattan") return GridMetric::kManhattan;
  if (text == "euclidean") return GridMetric::kEuclidean;
  if (text == "chebyshev") return GridMetric::kChebyshev;
  fail(ErrorCode::kInvalidArgument, "unknown grid metric: " + std::string(text));
}

MapKind parse_map_kind(std::string_view text) {
  if (text == "som") return MapKind::kSom;
  if (text == "sim") return MapKind::kSim;
  fail(ErrorCode::kInvalidArgument, "unknown map kind: " + std::string(text));
}

NeighborhoodKind parse_neighborhood_kind(std::string_view text) {
  if (text == "gaussian") return NeighborhoodKind::kGaussian;
  if (text == "dog") return NeighborhoodKind::kDifferenceOfGaussians;
  fail(ErrorCode::kInvalidArgument, "unknown neighborhood kind: " + std::string(text));
}

GridSpec::GridSpec(std::size_t rows, std::size_t cols, GridMetric metric)
    : rows_(rows), cols_(cols), metric_(metric) {
  require(rows >= 1 && cols >= 1, ErrorCode::kInvalidArgument,
          "grid must have at least one row and one column");
}

double GridSpec::distance(GridPos a, GridPos b) const {
  const double dr = std::abs(static_cast<double>(a.row) - static_cast<double>(b.row));
  const double dc = std::abs(static_cast<double>(a.col) - static_cast<double>(b.col));
  switch (metric_) {
    case GridMetric::kManhattan: return dr + dc;
    case GridMetric::kEuclidean: return std::sqrt(dr * dr + dc * dc);
    case GridMetric::kChebyshev: return std::max(dr, dc);
  }
  return dr + dc;
}

void TrainSchedule::validate() const {
  require(epochs >= 1, ErrorCode::kInvalidArgument, "epochs must be positive");
  require(eta_start >= 0.0 && eta_start <= 1.0 && eta_end >= 0.0 && eta_end <= 1.0,
          ErrorCode::kInvalidArgument, "learning rates must lie in [0, 1]");
  require(eta_end <= eta_start, ErrorCode::kInvalidArgument, "eta_end must not exceed eta_start");
  require(sigma_start > 0.0 && sigma_end > 0.0, ErrorCode::kInvalidArgument,
          "neighborhood radii must be positive");
  require(sigma_end <= sigma_start, ErrorCode::kInvalidArgument,
          "sigma_end must not exceed sigma_start");
  require(dog_ratio > 0.0, ErrorCode::kInvalidArgument, "dog_ratio must be positive");
  require(dog_amplitude >= 0.0 && dog_amplitude <= 1.0, ErrorCode::kInvalidArgument,
          "dog_amplitude must lie in [0, 1]");
}

double TrainSchedule::eta_at(double t_frac) const { return decay(eta_start, eta_end, t_frac); }

double TrainSchedule::sigma_at(double t_frac) const {
  return decay(sigma_start, sigma_end, t_frac);
}

double neighborhood(double z, const TrainSchedule& sched, double t_frac) {
  const double sigma = sched.sigma_at(t_frac);
  const double center = gaussian_kernel(z, sigma);
  if (sched.neighborhood == NeighborhoodKind::kGaussian) return center;
  return center - sched.dog_amplitude * gaussian_kernel(z, sched.dog_ratio * sigma);
}

FeatureMap::FeatureMap(GridSpec grid, MapKind kind, std::size_t input_dim)
    : grid_(grid), kind_(kind), weights_(grid.size(), input_dim) {
  require(input_dim >= 1, ErrorCode::kInvalidArgument, "input dimension must be positive");
}

FeatureMap::FeatureMap(GridSpec grid, MapKind kind, Matrix weights)
    : grid_(grid), kind_(kind), weights_(std::move(weights)) {
  require(weights_.rows() == grid_.size(), ErrorCode::kDimensionMismatch,
          "weight matrix must have one row per neuron");
  require(weights_.cols() >= 1, ErrorCode::kInvalidArgument, "input dimension must be positive");
  require(std::all_of(weights_.data().begin(), weights_.data().end(),
                      [](double w) { return std::isfinite(w); }),
          ErrorCode::kInvalidArgument, "weights must be finite");
}

FeatureMap init_map(const GridSpec& grid, MapKind kind, const Matrix& training_rows,
                    std::uint64_t seed) {
  require(!training_rows.empty(), ErrorCode::kEmptyInput, "training set is empty");
  std::mt19937_64 rng(derive_seed(seed, SeedPurpose::kInit));
  std::uniform_int_distribution<std::size_t> pick(0, training_rows.rows() - 1);
  Matrix weights(grid.size(), training_rows.cols());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto src = training_rows.row(pick(rng));
    std::copy(src.begin(), src.end(), weights.row(i).begin());
  }
  return FeatureMap(grid, kind, std::move(weights));
}

std::size_t find_winner_index(const FeatureMap& map, std::span<const double> x) {
  check_dim(map, x);
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < map.neuron_count(); ++i) {
    const double d = squared_distance(x, map.weight(i));
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

GridPos find_winner(const FeatureMap& map, std::span<const double> x) {
  return map.grid().position(find_winner_index(map, x));
}

void som_update(FeatureMap& map, std::span<const double> x, GridPos winner, double eta,
                const TrainSchedule& sched, double t_frac) {
  check_dim(map, x);
  const auto& grid = map.grid();
  for (std::size_t i = 0; i < map.neuron_count(); ++i) {
    const double step = eta * neighborhood(grid.distance(winner, grid.position(i)), sched, t_frac);
    if (step == 0.0) continue;
    auto w = map.weight(i);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += step * (x[k] - w[k]);
  }
}

void sim_update(FeatureMap& map, std::span<const double> x, GridPos winner, double eta,
                const TrainSchedule& sched, double t_frac) {
  check_dim(map, x);
  const auto& grid = map.grid();
  const auto w_win = map.weight(winner);
  std::vector<double> direction(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) direction[k] = x[k] - w_win[k];
  for (std::size_t i = 0; i < map.neuron_count(); ++i) {
    const double step = eta * neighborhood(grid.distance(winner, grid.position(i)), sched, t_frac);
    if (step == 0.0) continue;
    auto w = map.weight(i);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += step * direction[k];
  }
}

void update(FeatureMap& map, std::span<const double> x, GridPos winner, double eta,
            const TrainSchedule& sched, double t_frac) {
  if (map.kind() == MapKind::kSom) {
    som_update(map, x, winner, eta, sched, t_frac);
  } else {
    sim_update(map, x, winner, eta, sched, t_frac);
  }
}

double quantization_error(const FeatureMap& map, const Matrix& data) {
  require(!data.empty(), ErrorCode::kEmptyInput, "quantization error of empty data");
  require(data.cols() == map.input_dim(), ErrorCode::kDimensionMismatch,
          "data dimension does not match map input dimension");
  double total = 0.0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto x = data.row(r);
    total += std::sqrt(squared_distance(x, map.weight(find_winner_index(map, x))));
  }
  return total / static_cast<double>(data.rows());
}

TrainResult train(FeatureMap map, const Matrix& data, const TrainSchedule& sched,
                  std::uint64_t seed) {
  require(!data.empty(), ErrorCode::kEmptyInput, "training data is empty");
  require(data.cols() == map.input_dim(), ErrorCode::kDimensionMismatch,
          "training data dimension does not match map input dimension");
  sched.validate();

  std::mt19937_64 rng(derive_seed(seed, SeedPurpose::kTrain));
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const double total = static_cast<double>(sched.epochs * data.rows());
  const double denom = total > 1.0 ? total - 1.0 : 1.0;
  std::size_t presented = 0;

  TrainResult result{std::move(map), {}};
  result.error_history.reserve(sched.epochs);
  for (std::size_t epoch = 0; epoch < sched.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t idx : order) {
      const double t_frac = static_cast<double>(presented) / denom;
      const auto x = data.row(idx);
      const GridPos winner = find_winner(result.map, x);
      update(result.map, x, winner, sched.eta_at(t_frac), sched, t_frac);
      ++presented;
    }
    result.error_history.push_back(quantization_error(result.map, data));
  }
  return result;
}

void save_map(const FeatureMap& map, std::ostream& out) {
  out << "topodrift-map 1\n";
  out << "kind " << to_string(map.kind()) << '\n';
  out << "grid " << map.grid().rows() << ' ' << map.grid().cols() << ' '
      << to_string(map.grid().metric()) << '\n';
  out << "input_dim " << map.input_dim() << '\n';
  for (std::size_t i = 0; i < map.neuron_count(); ++i) {
    const auto w = map.weight(i);
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (k) out << ' ';
      out << format_double(w[k]);
    }
    out << '\n';
  }
}

FeatureMap load_map(std::istream& in) {
  auto expect_key = [&](const char* key) {
    std::string token;
    if (!(in >> token) || token != key) {
      fail(ErrorCode::kParse, std::string("map file: expected '") + key + "'");
    }
  };
  expect_key("topodrift-map");
  int version = 0;
  if (!(in >> version) || version != 1) fail(ErrorCode::kParse, "map file: unsupported version");

  std::string kind, metric;
  std::size_t rows = 0, cols = 0, dim = 0;
  expect_key("kind");
  in >> kind;
  expect_key("grid");
  in >> rows >> cols >> metric;
  expect_key("input_dim");
  in >> dim;
  if (!in) fail(ErrorCode::kParse, "map file: malformed header");

  GridSpec grid(rows, cols, parse_grid_metric(metric));
  require(dim >= 1, ErrorCode::kParse, "map file: input_dim must be positive");
  Matrix weights(grid.size(), dim);
  std::string token;
  for (double& w : weights.data()) {
    if (!(in >> token)) fail(ErrorCode::kParse, "map file: truncated weight block");
    const auto value = parse_double(token);
    if (!value) fail(ErrorCode::kParse, "map file: non-numeric weight '" + token + "'");
    w = *value;
  }
  if (in >> token) fail(ErrorCode::kParse, "map file: trailing data after weights");
  return FeatureMap(grid, parse_map_kind(kind), std::move(weights));
}

void save_map_file(const FeatureMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open map file for writing: " + path);
  save_map(map, out);
  if (!out) fail(ErrorCode::kIo, "failed writing map file: " + path);
}

FeatureMap load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open map file: " + path);
  return load_map(in);
}

}  // namespace topodrift
