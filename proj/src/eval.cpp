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

#include "topodrift/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "topodrift/format.hpp"

namespace topodrift {

double kappa(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth) {
  require(predicted.size() == truth.size(), ErrorCode::kDimensionMismatch,
          "kappa sequences differ in length");
  require(!predicted.empty(), ErrorCode::kEmptyInput, "kappa of empty sequences");
  const double n = static_cast<double>(predicted.size());
  double agree = 0.0, pred_pos = 0.0, truth_pos = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool t = truth[i] != 0;
    agree += p == t ? 1.0 : 0.0;
    pred_pos += p ? 1.0 : 0.0;
    truth_pos += t ? 1.0 : 0.0;
  }
  const double p_o = agree / n;
  const double p_e = (pred_pos / n) * (truth_pos / n) +
                     ((n - pred_pos) / n) * ((n - truth_pos) / n);
  if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

Alignment tolerant_align(std::span<const std::size_t> detected,
                         std::span<const std::size_t> truth, std::size_t tol,
                         std::size_t length) {
  // Candidate pairs ordered by distance, then truth, then detection.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> candidates;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (std::size_t d = 0; d < detected.size(); ++d) {
      const std::size_t gap =
          detected[d] > truth[t] ? detected[d] - truth[t] : truth[t] - detected[d];
      if (gap <= tol) candidates.emplace_back(gap, t, d);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<bool> truth_used(truth.size(), false);
  std::vector<bool> det_used(detected.size(), false);
  Alignment out;
  for (const auto& [gap, t, d] : candidates) {
    if (truth_used[t] || det_used[d]) continue;
    truth_used[t] = det_used[d] = true;
    out.matched.emplace_back(truth[t], detected[d]);
  }
  std::sort(out.matched.begin(), out.matched.end());

  out.predicted.assign(length, 0);
  out.truth.assign(length, 0);
  for (const std::size_t t : truth) {
    if (t < length) out.truth[t] = 1;
  }
  for (const auto& [t, d] : out.matched) {
    if (t < length) out.predicted[t] = 1;
  }
  for (std::size_t d = 0; d < detected.size(); ++d) {
    if (!det_used[d] && detected[d] < length) out.predicted[detected[d]] = 1;
  }
  return out;
}

DetectionReport evaluate(std::span<const std::size_t> detected,
                         std::span<const std::size_t> truth, std::size_t tol,
                         std::size_t length) {
  const Alignment a = tolerant_align(detected, truth, tol, length);
  DetectionReport r;
  r.matched_pairs = a.matched;
  r.kappa = length > 0 ? kappa(a.predicted, a.truth) : 0.0;
  r.recall = truth.empty() ? 1.0
                           : static_cast<double>(a.matched.size()) /
                                 static_cast<double>(truth.size());
  const std::size_t negatives = length > truth.size() ? length - truth.size() : 0;
  const std::size_t false_alarms = detected.size() - a.matched.size();
  r.fpr = negatives > 0
              ? std::min(1.0, static_cast<double>(false_alarms) / static_cast<double>(negatives))
              : 0.0;
  double delay = 0.0;
  for (const auto& [t, d] : a.matched) delay += d > t ? double(d - t) : double(t - d);
  r.mean_delay = a.matched.empty() ? 0.0 : delay / static_cast<double>(a.matched.size());
  return r;
}

void write_report_json(std::ostream& out, const DetectionReport& report) {
  nlohmann::ordered_json j;
  j["kappa"] = report.kappa;
  j["recall"] = report.recall;
  j["fpr"] = report.fpr;
  j["mean_delay"] = report.mean_delay;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& [t, d] : report.matched_pairs) pairs.push_back({t, d});
  j["matched_pairs"] = std::move(pairs);
  out << j.dump(2) << '\n';
}

KappaMatrix grid_search(const GridSearchSetup& setup, std::span<const double> alphas,
                        std::span<const std::size_t> windows) {
  require(!alphas.empty() && !windows.empty(), ErrorCode::kEmptyInput,
          "grid search needs at least one alpha and one window");
  require(setup.stream && setup.map, ErrorCode::kInvalidArgument,
          "grid search needs stream and map factories");

  KappaMatrix m{{alphas.begin(), alphas.end()}, {windows.begin(), windows.end()}, {}};
  const std::size_t cells = alphas.size() * windows.size();
  m.values.assign(cells, 0.0);

  auto run_cell = [&](std::size_t cell) {
    DetectorConfig cfg = setup.base;
    cfg.alpha = alphas[cell / windows.size()];
    cfg.window = windows[cell % windows.size()];
    auto stream = setup.stream();
    const auto result = run_monitor(*stream, setup.map(), cfg, setup.schedule, setup.seed);
    std::vector<std::size_t> detected;
    for (const auto& e : result.events) detected.push_back(e.chunk_index);
    m.values[cell] = evaluate(detected, setup.truth.shift_chunks, setup.tol, setup.length).kappa;
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(setup.threads, cells));
  if (threads == 1) {
    for (std::size_t c = 0; c < cells; ++c) run_cell(c);
    return m;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = next++; c < cells; c = next++) run_cell(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return m;
}

void write_kappa_csv(std::ostream& out, const KappaMatrix& matrix) {
  out << "alpha\\window";
  for (const auto w : matrix.windows) out << ',' << w;
  out << '\n';
  for (std::size_t a = 0; a < matrix.alphas.size(); ++a) {
    out << format_double(matrix.alphas[a]);
    for (std::size_t w = 0; w < matrix.windows.size(); ++w) {
      out << ',' << format_double(matrix.at(a, w));
    }
    out << '\n';
  }
}

}  // namespace topodrift
