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

#ifndef TOPODRIFT_DETECTOR_HPP_
#define TOPODRIFT_DETECTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topodrift/embedding.hpp"
#include "topodrift/stream.hpp"
#include "topodrift/topo_map.hpp"

namespace topodrift {

inline constexpr double kStdFloor = 1e-12;

enum class Statistic { kMean };

struct DetectorConfig {
  double alpha = 5.0;
  std::size_t window = 8;
  std::size_t chunk_size = 200;
  double cl_eta = 0.05;
  std::size_t cl_epochs = 1;
  Statistic statistic = Statistic::kMean;

  void validate() const;
};

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

// mean +/- alpha * std over the window, std with n-1 and floored.
Bounds decision_bounds(std::span<const double> recent, double alpha);

// True when current falls outside decision_bounds(recent, alpha).
bool decide(std::span<const double> recent, double current, double alpha);

struct SignalEntry {
  std::size_t chunk_index = 0;
  double score = 0.0;
  double lower = 0.0;  // NaN while the window is warming up
  double upper = 0.0;
  bool shift = false;
};

struct MonitorSignal {
  std::vector<SignalEntry> entries;
};

enum class ShiftAction { kWeightsUpdated };

struct ShiftEvent {
  std::size_t chunk_index = 0;
  double score = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  ShiftAction action = ShiftAction::kWeightsUpdated;
};

// Sliding-window alpha-sigma rule. No decision is made until the window
// holds `window` prior scores; a flagged score clears the window and then
// becomes its first element.
class ShiftDecider {
 public:
  ShiftDecider(double alpha, std::size_t window);

  SignalEntry observe(std::size_t chunk_index, double score);
  void reset() { recent_.clear(); }
  std::span<const double> recent() const;

 private:
  double alpha_;
  std::size_t capacity_;
  std::vector<double> recent_;
};

// Retrains on the last chunk with constant eta and sigma = schedule.sigma_end.
FeatureMap cl_update(FeatureMap map, const Matrix& chunk, double eta, std::size_t epochs,
                     const TrainSchedule& schedule, std::uint64_t seed);

// Stateful monitor: each chunk is summarized, scored against the previous
// chunk with the Gaussian KL divergence and fed to the decision rule. A
// detected shift triggers a continual-learning update of the map weights.
class Detector {
 public:
  struct Step {
    std::optional<SignalEntry> entry;  // empty for the bootstrap chunk
    std::optional<ShiftEvent> event;
  };

  Detector(FeatureMap map, DetectorConfig config, TrainSchedule schedule, std::uint64_t seed);

  Step step(const Chunk& chunk);

  const FeatureMap& map() const noexcept { return map_; }
  const DetectorConfig& config() const noexcept { return config_; }

 private:
  FeatureMap map_;
  DetectorConfig config_;
  TrainSchedule schedule_;
  std::uint64_t seed_;
  ShiftDecider decider_;
  std::optional<GaussianSummary> previous_;
  std::optional<std::size_t> last_index_;
};

struct MonitorResult {
  MonitorSignal signal;
  std::vector<ShiftEvent> events;
  FeatureMap map;
};

MonitorResult run_monitor(ChunkSource& stream, FeatureMap map, const DetectorConfig& config,
                          const TrainSchedule& schedule, std::uint64_t seed);

// Header chunk_index,score,lower,upper,shift; shift is 0 or 1.
void write_signal_csv(std::ostream& out, const MonitorSignal& signal);
MonitorSignal read_signal_csv(const std::string& path);

// One JSON object per line: {"chunk_index":..,"score":..,"lower":..,"upper":..}
void write_events_jsonl(std::ostream& out, std::span<const ShiftEvent> events);
std::vector<ShiftEvent> read_events_jsonl(const std::string& path);

}  // namespace topodrift

#endif  // TOPODRIFT_DETECTOR_HPP_
