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

#include "topodrift/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "topodrift/seed.hpp"

namespace topodrift {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

std::vector<double> multiply(const Matrix& m, const std::vector<double>& v) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
  return out;
}

std::vector<double> column(const Matrix& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, c);
  return out;
}

}  // namespace

PcaModel fit_pca(const Matrix& data, std::size_t k, std::size_t max_iters, double tol,
                 std::uint64_t seed) {
  require(k >= 1, ErrorCode::kInvalidArgument, "PCA needs at least one component");
  require(data.rows() >= k && data.rows() >= 2, ErrorCode::kInvalidArgument,
          "PCA needs at least max(k, 2) rows");
  require(k <= data.cols(), ErrorCode::kInvalidArgument,
          "PCA component count exceeds input dimension");
  const std::size_t n = data.rows();
  const std::size_t p = data.cols();

  PcaModel model;
  model.mean.assign(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) model.mean[c] += data(r, c);
  }
  for (double& m : model.mean) m /= static_cast<double>(n);

  Matrix cov(p, p);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = data.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      const double di = x[i] - model.mean[i];
      for (std::size_t j = i; j < p; ++j) cov(i, j) += di * (x[j] - model.mean[j]);
    }
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      cov(i, j) /= static_cast<double>(n - 1);
      cov(j, i) = cov(i, j);
    }
    trace += cov(i, i);
  }
  const double rank_floor = std::max(trace, 1.0) * 1e-12;

  std::mt19937_64 rng(derive_seed(seed, SeedPurpose::kPca));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> found;

  for (std::size_t comp = 0; comp < k; ++comp) {
    std::vector<double> v(p);
    for (double& x : v) x = normal(rng);
    normalize(v);
    for (std::size_t it = 0; it < max_iters; ++it) {
      auto next = multiply(cov, v);
      for (const auto& prev : found) {
        const double proj = dot(next, prev);
        for (std::size_t i = 0; i < p; ++i) next[i] -= proj * prev[i];
      }
      const double norm = std::sqrt(dot(next, next));
      if (norm <= rank_floor) break;
      for (double& x : next) x /= norm;
      if (dot(next, v) < 0.0) {
        for (double& x : next) x = -x;
      }
      double change = 0.0;
      for (std::size_t i = 0; i < p; ++i) change = std::max(change, std::abs(next[i] - v[i]));
      v = std::move(next);
      if (change < tol) break;
    }
    const double lambda = dot(v, multiply(cov, v));
    if (!(lambda > rank_floor)) {
      fail(ErrorCode::kInvalidArgument, "PCA component count exceeds the rank of the data");
    }
    // Deflate so the next component sees the residual covariance.
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) cov(i, j) -= lambda * v[i] * v[j];
    }
    // Deterministic sign: largest-magnitude coordinate positive.
    const auto big = std::max_element(v.begin(), v.end(), [](double a, double b) {
      return std::abs(a) < std::abs(b);
    });
    if (*big < 0.0) {
      for (double& x : v) x = -x;
    }
    found.push_back(v);
    model.explained_variance.push_back(lambda);
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return model.explained_variance[a] > model.explained_variance[b];
  });
  std::vector<double> sorted_var;
  for (std::size_t i : order) {
    model.components.append_row(found[i]);
    sorted_var.push_back(model.explained_variance[i]);
  }
  model.explained_variance = std::move(sorted_var);
  return model;
}

Matrix project(const PcaModel& model, const Matrix& chunk) {
  require(chunk.cols() == model.mean.size(), ErrorCode::kDimensionMismatch,
          "chunk dimension does not match PCA input dimension");
  const std::size_t k = model.components.rows();
  Matrix latent(chunk.rows(), k);
  std::vector<double> centered(chunk.cols());
  for (std::size_t r = 0; r < chunk.rows(); ++r) {
    const auto x = chunk.row(r);
    for (std::size_t c = 0; c < x.size(); ++c) centered[c] = x[c] - model.mean[c];
    for (std::size_t j = 0; j < k; ++j) latent(r, j) = dot(centered, model.components.row(j));
  }
  return latent;
}

double cumulative_hist_distance(const Matrix& latent_a, const Matrix& latent_b,
                                std::size_t n_bins) {
  require(!latent_a.empty() && !latent_b.empty(), ErrorCode::kEmptyInput,
          "histogram distance of an empty chunk");
  require(latent_a.cols() == latent_b.cols(), ErrorCode::kDimensionMismatch,
          "latent chunks differ in component count");
  require(n_bins >= 1, ErrorCode::kInvalidArgument, "n_bins must be positive");

  double worst = 0.0;
  for (std::size_t c = 0; c < latent_a.cols(); ++c) {
    const auto a = column(latent_a, c);
    const auto b = column(latent_b, c);
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
    const double lo = std::min(*amin, *bmin);
    const double hi = std::max(*amax, *bmax);
    if (!(hi > lo)) continue;  // both chunks collapse onto one point
    const double width = (hi - lo) / static_cast<double>(n_bins);

    auto histogram = [&](const std::vector<double>& values) {
      std::vector<double> counts(n_bins, 0.0);
      for (double v : values) {
        const auto bin = static_cast<std::size_t>((v - lo) / width);
        counts[std::min(bin, n_bins - 1)] += 1.0;
      }
      return counts;
    };
    const auto ha = histogram(a);
    const auto hb = histogram(b);
    double ca = 0.0, cb = 0.0;
    for (std::size_t i = 0; i < n_bins; ++i) {
      ca += ha[i] / static_cast<double>(a.size());
      cb += hb[i] / static_cast<double>(b.size());
      worst = std::max(worst, std::abs(ca - cb));
    }
  }
  return std::min(worst, 1.0);
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::kEmptyInput, "KS statistic of an empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());

  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double t = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == t) ++i;
    while (j < sb.size() && sb[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_statistic_latent(const Matrix& latent_a, const Matrix& latent_b) {
  require(latent_a.cols() == latent_b.cols(), ErrorCode::kDimensionMismatch,
          "latent chunks differ in component count");
  double worst = 0.0;
  for (std::size_t c = 0; c < latent_a.cols(); ++c) {
    worst = std::max(worst, ks_statistic(column(latent_a, c), column(latent_b, c)));
  }
  return worst;
}

BaselineSignals run_baseline(ChunkSource& stream, const PcaModel& model, std::size_t n_bins,
                             std::optional<DecisionRule> rule) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  std::optional<ShiftDecider> hist_decider, ks_decider;
  if (rule) {
    hist_decider.emplace(rule->alpha, rule->window);
    ks_decider.emplace(rule->alpha, rule->window);
  }
  auto record = [&](std::optional<ShiftDecider>& decider, std::size_t index, double score) {
    if (decider) return decider->observe(index, score);
    return SignalEntry{index, score, kNaN, kNaN, false};
  };

  BaselineSignals out;
  std::optional<Matrix> previous;
  while (auto chunk = stream.next()) {
    Matrix latent = project(model, chunk->samples);
    if (previous) {
      out.histogram.entries.push_back(record(
          hist_decider, chunk->index, cumulative_hist_distance(*previous, latent, n_bins)));
      out.ks.entries.push_back(
          record(ks_decider, chunk->index, ks_statistic_latent(*previous, latent)));
    }
    previous = std::move(latent);
  }
  return out;
}

}  // namespace topodrift
