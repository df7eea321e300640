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

#ifndef TOPODRIFT_EVAL_HPP_
#define TOPODRIFT_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "topodrift/detector.hpp"
#include "topodrift/stream.hpp"
#include "topodrift/topo_map.hpp"

namespace topodrift {

inline constexpr std::size_t kDefaultTolerance = 1;

// Cohen's kappa of two binary sequences. Two identical constant sequences
// score 1.
double kappa(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);

struct Alignment {
  std::vector<std::pair<std::size_t, std::size_t>> matched;  // (truth, detected)
  std::vector<std::uint8_t> predicted;  // matched detections moved onto their truth index
  std::vector<std::uint8_t> truth;
};

// Greedy nearest-first matching within +/- tol chunks; each truth index and
// each detection is used at most once. Sequences cover indices [0, length).
Alignment tolerant_align(std::span<const std::size_t> detected,
                         std::span<const std::size_t> truth, std::size_t tol,
                         std::size_t length);

struct DetectionReport {
  double kappa = 0.0;
  double recall = 0.0;
  double fpr = 0.0;
  double mean_delay = 0.0;  // mean |detected - truth| over matched pairs
  std::vector<std::pair<std::size_t, std::size_t>> matched_pairs;
};

DetectionReport evaluate(std::span<const std::size_t> detected,
                         std::span<const std::size_t> truth, std::size_t tol,
                         std::size_t length);

void write_report_json(std::ostream& out, const DetectionReport& report);

struct KappaMatrix {
  std::vector<double> alphas;
  std::vector<std::size_t> windows;
  std::vector<double> values;  // alphas.size() x windows.size(), row-major

  double at(std::size_t a, std::size_t w) const { return values[a * windows.size() + w]; }
};

using StreamFactory = std::function<std::unique_ptr<ChunkSource>()>;
using MapFactory = std::function<FeatureMap()>;

struct GridSearchSetup {
  StreamFactory stream;
  MapFactory map;
  GroundTruth truth;
  std::size_t length = 0;  // binary-sequence length handed to evaluate()
  DetectorConfig base;     // alpha and window are overwritten per cell
  TrainSchedule schedule;
  std::uint64_t seed = 0;
  std::size_t tol = kDefaultTolerance;
  std::size_t threads = 1;
};

// One run_monitor per (alpha, window) cell, each on a freshly built stream
// and map. The matrix does not depend on the thread count.
KappaMatrix grid_search(const GridSearchSetup& setup, std::span<const double> alphas,
                        std::span<const std::size_t> windows);

// Alpha rows, window columns; the header row lists windows after an
// "alpha\window" corner cell.
void write_kappa_csv(std::ostream& out, const KappaMatrix& matrix);

}  // namespace topodrift

#endif  // TOPODRIFT_EVAL_HPP_
