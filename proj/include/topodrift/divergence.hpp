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

#ifndef TOPODRIFT_DIVERGENCE_HPP_
#define TOPODRIFT_DIVERGENCE_HPP_

#include <vector>

#include "topodrift/embedding.hpp"

namespace topodrift {

inline constexpr double kPmfSmoothing = 1e-10;

// Probability mass function over labelled support points.
class DiscretePmf {
 public:
  // Throws unless probs are nonnegative and sum to 1 within 1e-9.
  DiscretePmf(std::vector<double> support, std::vector<double> probs);

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& probs() const noexcept { return probs_; }

 private:
  std::vector<double> support_;
  std::vector<double> probs_;
};

// KL(p || q) in nats. Supports are aligned by label; zero q-bins are
// replaced by kPmfSmoothing and q is renormalized.
double kl_discrete(const DiscretePmf& p, const DiscretePmf& q);

// Closed form for two Gaussians:
//   log(sigma_q / sigma_p) + (sigma_p^2 + (mu_p - mu_q)^2) / (2 sigma_q^2) - 1/2
double kl_gaussian(const GaussianSummary& p, const GaussianSummary& q);

}  // namespace topodrift

#endif  // TOPODRIFT_DIVERGENCE_HPP_
