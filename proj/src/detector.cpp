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

#include "topodrift/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "topodrift/divergence.hpp"
#include "topodrift/format.hpp"
#include "topodrift/seed.hpp"

namespace topodrift {

void DetectorConfig::validate() const {
  require(alpha > 0.0, ErrorCode::kInvalidArgument, "alpha must be positive");
  require(window >= 1, ErrorCode::kInvalidArgument, "window must be at least 1");
  require(chunk_size >= 2, ErrorCode::kInvalidArgument, "chunk_size must be at least 2");
  require(cl_eta >= 0.0 && cl_eta <= 1.0, ErrorCode::kInvalidArgument,
          "cl_eta must lie in [0, 1]");
  require(cl_epochs >= 1, ErrorCode::kInvalidArgument, "cl_epochs must be positive");
}

Bounds decision_bounds(std::span<const double> recent, double alpha) {
  require(!recent.empty(), ErrorCode::kEmptyInput, "decision window is empty");
  const double n = static_cast<double>(recent.size());
  const double mean = std::accumulate(recent.begin(), recent.end(), 0.0) / n;
  double std_dev = 0.0;
  if (recent.size() >= 2) {
    double ss = 0.0;
    for (double v : recent) ss += (v - mean) * (v - mean);
    std_dev = std::sqrt(ss / (n - 1.0));
  }
  std_dev = std::max(std_dev, kStdFloor);
  return {mean - alpha * std_dev, mean + alpha * std_dev};
}

bool decide(std::span<const double> recent, double current, double alpha) {
  const Bounds b = decision_bounds(recent, alpha);
  return current < b.lower || current > b.upper;
}

ShiftDecider::ShiftDecider(double alpha, std::size_t window)
    : alpha_(alpha), capacity_(window) {
  require(alpha > 0.0, ErrorCode::kInvalidArgument, "alpha must be positive");
  require(window >= 1, ErrorCode::kInvalidArgument, "window must be at least 1");
  recent_.reserve(window);
}

std::span<const double> ShiftDecider::recent() const { return recent_; }

SignalEntry ShiftDecider::observe(std::size_t chunk_index, double score) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  SignalEntry entry{chunk_index, score, kNaN, kNaN, false};
  if (recent_.size() == capacity_) {
    const Bounds b = decision_bounds(recent_, alpha_);
    entry.lower = b.lower;
    entry.upper = b.upper;
    entry.shift = score < b.lower || score > b.upper;
  }
  if (entry.shift) {
    recent_.clear();
  } else if (recent_.size() == capacity_) {
    recent_.erase(recent_.begin());
  }
  recent_.push_back(score);
  return entry;
}

FeatureMap cl_update(FeatureMap map, const Matrix& chunk, double eta, std::size_t epochs,
                     const TrainSchedule& schedule, std::uint64_t seed) {
  require(!chunk.empty(), ErrorCode::kEmptyInput, "continual update on an empty chunk");
  require(chunk.cols() == map.input_dim(), ErrorCode::kDimensionMismatch,
          "chunk dimension does not match map input dimension");
  if (eta == 0.0) return map;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(chunk.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t idx : order) {
      const auto x = chunk.row(idx);
      // t_frac = 1 pins sigma at the end of the training schedule.
      update(map, x, find_winner(map, x), eta, schedule, 1.0);
    }
  }
  return map;
}

Detector::Detector(FeatureMap map, DetectorConfig config, TrainSchedule schedule,
                   std::uint64_t seed)
    : map_(std::move(map)),
      config_(config),
      schedule_(schedule),
      seed_(seed),
      decider_(config.alpha, config.window) {
  config_.validate();
  schedule_.validate();
}

Detector::Step Detector::step(const Chunk& chunk) {
  require(chunk.samples.rows() >= 2, ErrorCode::kInvalidArgument,
          "chunk must hold at least two samples");
  require(!last_index_ || chunk.index > *last_index_, ErrorCode::kInvalidArgument,
          "chunk indices must be strictly increasing");
  last_index_ = chunk.index;

  const GaussianSummary current = chunk_summary(map_, chunk.samples);
  Step out;
  if (previous_) {
    const double score = kl_gaussian(*previous_, current);
    out.entry = decider_.observe(chunk.index, score);
    if (out.entry->shift) {
      map_ = cl_update(std::move(map_), chunk.samples, config_.cl_eta, config_.cl_epochs,
                       schedule_, derive_seed(seed_, SeedPurpose::kContinual, chunk.index));
      out.event = ShiftEvent{chunk.index, score, out.entry->lower, out.entry->upper,
                             ShiftAction::kWeightsUpdated};
    }
  }
  previous_ = current;
  return out;
}

MonitorResult run_monitor(ChunkSource& stream, FeatureMap map, const DetectorConfig& config,
                          const TrainSchedule& schedule, std::uint64_t seed) {
  Detector detector(std::move(map), config, schedule, seed);
  MonitorResult result{{}, {}, detector.map()};
  while (auto chunk = stream.next()) {
    auto step = detector.step(*chunk);
    if (step.entry) result.signal.entries.push_back(*step.entry);
    if (step.event) result.events.push_back(*step.event);
  }
  result.map = detector.map();
  return result;
}

void write_signal_csv(std::ostream& out, const MonitorSignal& signal) {
  out << "chunk_index,score,lower,upper,shift\n";
  for (const auto& e : signal.entries) {
    out << e.chunk_index << ',' << format_double(e.score) << ',' << format_double(e.lower) << ','
        << format_double(e.upper) << ',' << (e.shift ? 1 : 0) << '\n';
  }
}

MonitorSignal read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open signal file: " + path);
  MonitorSignal signal;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) {
      fail(ErrorCode::kParse, path + ": expected 5 columns on line " + std::to_string(line_no));
    }
    SignalEntry e;
    const auto idx = parse_double(cells[0]);
    const auto score = parse_double(cells[1]);
    const auto lower = parse_double(cells[2]);
    const auto upper = parse_double(cells[3]);
    if (!idx || !score || !lower || !upper) {
      fail(ErrorCode::kParse, path + ": non-numeric cell on line " + std::to_string(line_no));
    }
    e.chunk_index = static_cast<std::size_t>(*idx);
    e.score = *score;
    e.lower = *lower;
    e.upper = *upper;
    e.shift = trim(cells[4]) == "1";
    signal.entries.push_back(e);
  }
  return signal;
}

void write_events_jsonl(std::ostream& out, std::span<const ShiftEvent> events) {
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["chunk_index"] = e.chunk_index;
    j["score"] = e.score;
    j["lower"] = e.lower;
    j["upper"] = e.upper;
    out << j.dump() << '\n';
  }
}

std::vector<ShiftEvent> read_events_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open events file: " + path);
  std::vector<ShiftEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      events.push_back({j.at("chunk_index").get<std::size_t>(), j.at("score").get<double>(),
                        j.at("lower").get<double>(), j.at("upper").get<double>(),
                        ShiftAction::kWeightsUpdated});
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::kParse, path + ": " + ex.what());
    }
  }
  return events;
}

}  // namespace topodrift
