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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "topodrift/divergence.hpp"
#include "topodrift/embedding.hpp"

namespace topodrift {
namespace {

using testing::kCases;
using testing::random_matrix;
using testing::random_vector;

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

TEST_CASE("distance matrix entries") {
  std::mt19937_64 rng(1);
  FeatureMap map(GridSpec(3, 3), MapKind::kSom, random_matrix(rng, 9, 4));
  const auto w = map.weight(GridPos{1, 1});
  const std::vector<double> x(w.begin(), w.end());
  const DistanceMatrix d = distance_matrix(map, x);
  CHECK(d.rows == 3);
  CHECK(d.cols == 3);
  CHECK(d.at(1, 1) == 0.0);

  FeatureMap line(GridSpec(1, 2), MapKind::kSom, Matrix::from_rows({{0.0}, {4.0}}));
  const std::vector<double> one{1.0};
  const DistanceMatrix dl = distance_matrix(line, one);
  CHECK(dl.values == std::vector<double>{1.0, 3.0});
  CHECK(sample_statistic(line, one) == 2.0);
}

TEST_CASE("distance matrix matches per-neuron recomputation") {
  std::mt19937_64 rng(2);
  for (int c = 0; c < kCases; ++c) {
    FeatureMap map(GridSpec(10, 10), MapKind::kSom, random_matrix(rng, 100, 5));
    const auto x = random_vector(rng, 5);
    const DistanceMatrix d = distance_matrix(map, x);
    double total = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      const double want = distance(x, map.weight(i));
      REQUIRE(d.values[i] == doctest::Approx(want).epsilon(1e-14));
      REQUIRE(d.values[i] >= 0.0);
      REQUIRE(std::isfinite(d.values[i]));
      total += want;
    }
    REQUIRE(sample_statistic(map, x) == doctest::Approx(total / 100.0).epsilon(1e-13));
  }
}

TEST_CASE("distance matrix entry is zero only at an exact weight") {
  std::mt19937_64 rng(3);
  for (int c = 0; c < kCases; ++c) {
    FeatureMap map(GridSpec(3, 4), MapKind::kSom, random_matrix(rng, 12, 3));
    const std::size_t pick = static_cast<std::size_t>(c) % 12;
    std::vector<double> x(map.weight(pick).begin(), map.weight(pick).end());
    const DistanceMatrix d = distance_matrix(map, x);
    for (std::size_t i = 0; i < 12; ++i) {
      const bool same = std::equal(x.begin(), x.end(), map.weight(i).begin());
      REQUIRE((d.values[i] == 0.0) == same);
    }
  }
}

TEST_CASE("statistic of a sample sitting on every neuron is zero") {
  const std::vector<double> x{1.5, -2.0};
  Matrix w(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    w(i, 0) = x[0];
    w(i, 1) = x[1];
  }
  FeatureMap map(GridSpec(2, 2), MapKind::kSom, w);
  CHECK(sample_statistic(map, x) == 0.0);
}

TEST_CASE("single-neuron statistic is the plain distance") {
  std::mt19937_64 rng(4);
  for (int c = 0; c < kCases; ++c) {
    FeatureMap map(GridSpec(1, 1), MapKind::kSom, random_matrix(rng, 1, 6));
    const auto x = random_vector(rng, 6);
    REQUIRE(sample_statistic(map, x) == doctest::Approx(distance(x, map.weight(0))).epsilon(1e-15));
  }
}

TEST_CASE("statistic lies between the extreme distances") {
  std::mt19937_64 rng(5);
  for (int c = 0; c < kCases; ++c) {
    FeatureMap map(GridSpec(4, 5), MapKind::kSom, random_matrix(rng, 20, 3));
    const auto x = random_vector(rng, 3, -10.0, 10.0);
    const DistanceMatrix d = distance_matrix(map, x);
    const auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
    const double s = sample_statistic(map, x);
    REQUIRE(s >= *lo - 1e-12);
    REQUIRE(s <= *hi + 1e-12);
  }
}

TEST_CASE("distance matrix rejects mismatched samples") {
  FeatureMap map(GridSpec(2, 2), MapKind::kSom, 3);
  const std::vector<double> x{1.0};
  CHECK_THROWS_AS(distance_matrix(map, x), Error);
  CHECK_THROWS_AS(sample_statistic(map, x), Error);
}

TEST_CASE("moment examples") {
  const std::vector<double> flat{5, 5, 5, 5};
  const MomentVector c = compute_moments(flat);
  CHECK(c.mean == 5.0);
  CHECK(c.variance == 0.0);
  CHECK(c.skewness == 0.0);
  CHECK(c.kurtosis == 0.0);

  const std::vector<double> two{0, 2};
  const MomentVector t = compute_moments(two);
  CHECK(t.mean == 1.0);
  CHECK(t.variance == 1.0);
  CHECK(t.skewness == 0.0);
  CHECK(t.kurtosis == 1.0);

  // Hand-computed: values 1,2,3,10. mean 4, central 3rd/4th moments below.
  const std::vector<double> v{1, 2, 3, 10};
  const MomentVector m = compute_moments(v);
  const double m2 = (9 + 4 + 1 + 36) / 4.0;
  const double m3 = (-27 - 8 - 1 + 216) / 4.0;
  const double m4 = (81 + 16 + 1 + 1296) / 4.0;
  CHECK(m.mean == 4.0);
  CHECK(m.variance == doctest::Approx(m2));
  CHECK(m.skewness == doctest::Approx(m3 / std::pow(m2, 1.5)));
  CHECK(m.kurtosis == doctest::Approx(m4 / (m2 * m2)));

  CHECK_THROWS_AS(compute_moments(std::vector<double>{}), Error);
}

TEST_CASE("moments of a large normal sample") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(100000);
  for (double& x : v) x = g(rng);
  const MomentVector m = compute_moments(v);
  CHECK(std::abs(m.mean) < 0.05);
  CHECK(m.variance == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(m.skewness) < 0.05);
  CHECK(m.kurtosis == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("moments shift and scale as expected") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int c = 0; c < kCases; ++c) {
    auto v = random_vector(rng, 3 + static_cast<std::size_t>(c % 40));
    const MomentVector base = compute_moments(v);
    const double shift = u(rng);
    const double s = scale(rng);
    std::vector<double> shifted(v), scaled(v);
    for (double& x : shifted) x += shift;
    for (double& x : scaled) x *= s;
    const MomentVector a = compute_moments(shifted);
    const MomentVector b = compute_moments(scaled);
    REQUIRE(a.mean == doctest::Approx(base.mean + shift).epsilon(1e-9).scale(10.0));
    REQUIRE(a.variance == doctest::Approx(base.variance).epsilon(1e-9));
    REQUIRE(a.skewness == doctest::Approx(base.skewness).epsilon(1e-9).scale(1.0));
    REQUIRE(a.kurtosis == doctest::Approx(base.kurtosis).epsilon(1e-9));
    REQUIRE(b.variance == doctest::Approx(base.variance * s * s).epsilon(1e-9));
    REQUIRE(b.skewness == doctest::Approx(base.skewness).epsilon(1e-9).scale(1.0));
    REQUIRE(b.kurtosis == doctest::Approx(base.kurtosis).epsilon(1e-9));
    REQUIRE(base.variance >= 0.0);
  }
}

TEST_CASE("gaussian fit uses the unbiased variance with a floor") {
  const std::vector<double> two{1.0, 3.0};
  const GaussianSummary g = fit_gaussian(two);
  CHECK(g.mean == 2.0);
  CHECK(g.variance == 2.0);
  CHECK(g.count == 2);

  const std::vector<double> same{4.0, 4.0, 4.0};
  const GaussianSummary f = fit_gaussian(same);
  CHECK(f.mean == 4.0);
  CHECK(f.variance == kVarianceFloor);

  CHECK_THROWS_AS(fit_gaussian(std::vector<double>{1.0}), Error);
}

TEST_CASE("chunk summary examples") {
  std::mt19937_64 rng(8);
  FeatureMap map(GridSpec(3, 3), MapKind::kSom, random_matrix(rng, 9, 2));
  const auto x = random_vector(rng, 2);
  Matrix chunk;
  for (int i = 0; i < 5; ++i) chunk.append_row(x);
  const GaussianSummary s = chunk_summary(map, chunk);
  CHECK(s.mean == doctest::Approx(sample_statistic(map, x)).epsilon(1e-14));
  CHECK(s.variance == kVarianceFloor);
  CHECK(s.count == 5);

  CHECK_THROWS_AS(chunk_summary(map, Matrix::from_rows({{0.0, 0.0}})), Error);

  // The summary is exactly a Gaussian fit of the per-sample statistics.
  const Matrix c = random_matrix(rng, 30, 2);
  std::vector<double> stats;
  for (std::size_t r = 0; r < c.rows(); ++r) stats.push_back(sample_statistic(map, c.row(r)));
  const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / 30.0;
  double ss = 0.0;
  for (double v : stats) ss += (v - mean) * (v - mean);
  const GaussianSummary cs = chunk_summary(map, c);
  CHECK(cs.mean == doctest::Approx(mean).epsilon(1e-13));
  CHECK(cs.variance == doctest::Approx(ss / 29.0).epsilon(1e-12));
  CHECK(cs.count == 30);
}

TEST_CASE("stationary chunks have close summaries") {
  std::mt19937_64 rng(9);
  const Matrix train_rows = testing::gaussian_matrix(rng, 500, 10);
  const FeatureMap map =
      train(init_map(GridSpec(10, 10), MapKind::kSom, train_rows, 1), train_rows,
            TrainSchedule{}, 1)
          .map;
  for (int c = 0; c < 20; ++c) {
    const GaussianSummary a = chunk_summary(map, testing::gaussian_matrix(rng, 200, 10));
    const GaussianSummary b = chunk_summary(map, testing::gaussian_matrix(rng, 200, 10));
    CHECK(kl_gaussian(a, b) < 0.1);
  }
}

TEST_CASE("summary invariants over random chunks") {
  std::mt19937_64 rng(10);
  for (int c = 0; c < kCases; ++c) {
    FeatureMap map(GridSpec(2, 3), MapKind::kSom, random_matrix(rng, 6, 3));
    const std::size_t n = 2 + static_cast<std::size_t>(c % 10);
    const GaussianSummary s = chunk_summary(map, random_matrix(rng, n, 3));
    REQUIRE(s.count == n);
    REQUIRE(s.variance >= kVarianceFloor);
  }
}

TEST_CASE("per-sample moments and their CSV export") {
  std::mt19937_64 rng(11);
  FeatureMap map(GridSpec(2, 2), MapKind::kSom, random_matrix(rng, 4, 2));
  const Matrix chunk = random_matrix(rng, 3, 2);
  const auto moments = chunk_moments(map, chunk);
  REQUIRE(moments.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    const MomentVector want = compute_moments(distance_matrix(map, chunk.row(r)).values);
    CHECK(moments[r].mean == want.mean);
    CHECK(moments[r].kurtosis == want.kurtosis);
  }
  std::vector<MomentRecord> records;
  for (const auto& m : moments) records.push_back({7, m});
  std::ostringstream out;
  write_moments_csv(out, records);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "chunk_index,m1,m2,m3,m4");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.rfind("7,", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
    ++rows;
  }
  CHECK(rows == 3);
}

}  // namespace
}  // namespace topodrift
