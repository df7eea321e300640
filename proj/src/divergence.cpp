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

#include "topodrift/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace topodrift {
namespace {

std::vector<std::size_t> order_by_label(const std::vector<double>& support) {
  std::vector<std::size_t> idx(support.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
  return idx;
}

}  // namespace

DiscretePmf::DiscretePmf(std::vector<double> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  require(!probs_.empty(), ErrorCode::kEmptyInput, "pmf has no support");
  require(support_.size() == probs_.size(), ErrorCode::kDimensionMismatch,
          "pmf support and probability vectors differ in length");
  double total = 0.0;
  for (double p : probs_) {
    require(p >= 0.0 && std::isfinite(p), ErrorCode::kInvalidArgument,
            "pmf probabilities must be finite and nonnegative");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorCode::kInvalidArgument,
          "pmf probabilities must sum to one");
}

double kl_discrete(const DiscretePmf& p, const DiscretePmf& q) {
  require(p.support().size() == q.support().size(), ErrorCode::kDimensionMismatch,
          "pmf supports differ in size");
  const auto ip = order_by_label(p.support());
  const auto iq = order_by_label(q.support());
  const std::size_t n = ip.size();

  std::vector<double> qs(n);
  double q_total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    require(p.support()[ip[k]] == q.support()[iq[k]], ErrorCode::kDimensionMismatch,
            "pmf supports differ after alignment");
    qs[k] = q.probs()[iq[k]] > 0.0 ? q.probs()[iq[k]] : kPmfSmoothing;
    q_total += qs[k];
  }

  double kl = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double pk = p.probs()[ip[k]];
    if (pk == 0.0) continue;
    kl += pk * std::log(pk / (qs[k] / q_total));
  }
  return std::max(kl, 0.0);
}

double kl_gaussian(const GaussianSummary& p, const GaussianSummary& q) {
  require(p.variance > 0.0 && q.variance > 0.0, ErrorCode::kInvalidArgument,
          "Gaussian KL needs positive variances");
  const double dm = p.mean - q.mean;
  const double kl = 0.5 * std::log(q.variance / p.variance) +
                    (p.variance + dm * dm) / (2.0 * q.variance) - 0.5;
  return std::max(kl, 0.0);
}

}  // namespace topodrift
