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

#ifndef TOPODRIFT_STREAM_HPP_
#define TOPODRIFT_STREAM_HPP_

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "topodrift/matrix.hpp"

namespace topodrift {

struct Chunk {
  std::size_t index = 0;
  Matrix samples;
};

// Single-consumer pull iterator over chunks in stream order.
class ChunkSource {
 public:
  virtual ~ChunkSource() = default;
  virtual std::optional<Chunk> next() = 0;
};

// Replays chunks cut from an in-memory matrix.
class MatrixChunkSource final : public ChunkSource {
 public:
  // Rows [first_row, end) are cut into chunks of chunk_size; a trailing
  // chunk shorter than two rows is dropped. Chunk indices start at
  // first_index.
  MatrixChunkSource(const Matrix& data, std::size_t chunk_size, std::size_t first_row = 0,
                    std::size_t first_index = 0);

  std::optional<Chunk> next() override;

 private:
  const Matrix* data_;
  std::size_t chunk_size_;
  std::size_t row_;
  std::size_t index_;
};

namespace detail {
class CsvLineParser;
}

// Lazily reads a numeric CSV file chunk by chunk.
class CsvChunkReader final : public ChunkSource {
 public:
  CsvChunkReader(const std::string& path, std::size_t chunk_size);
  ~CsvChunkReader() override;
  std::optional<Chunk> next() override;

 private:
  std::ifstream in_;
  std::string path_;
  std::size_t chunk_size_;
  std::size_t index_ = 0;
  std::unique_ptr<detail::CsvLineParser> parser_;
};

std::unique_ptr<ChunkSource> read_chunks(const std::string& path, std::size_t chunk_size);

// Whole-file CSV load. A first row that does not parse as numbers is
// treated as a header and skipped.
Matrix read_csv(const std::string& path);
Matrix read_csv(std::istream& in);
void write_csv(std::ostream& out, const Matrix& data);

struct GroundTruth {
  std::vector<std::size_t> shift_chunks;  // sorted
};

// One column of chunk indices, no header.
void write_truth(std::ostream& out, const GroundTruth& truth);
GroundTruth read_truth(const std::string& path);

enum class TransitionKind { kSudden, kIncremental };

struct Regime {
  std::vector<double> mean;     // per feature
  std::vector<double> stddev;   // per feature
  double perturbation = 0.0;    // half-width of per-sample uniform noise added on top
  std::size_t duration = 0;     // chunks
};

struct StreamSpec {
  std::size_t n_features = 0;
  std::size_t chunk_size = 0;
  std::size_t n_chunks = 0;
  std::vector<Regime> regimes;
  TransitionKind transition = TransitionKind::kSudden;
  std::size_t blend_chunks = 1;
  std::uint64_t seed = 0;

  void validate() const;

  // Flat key = value format. Regimes are indexed groups:
  //   regime.0.duration = 20
  //   regime.0.mean = 0            (one value broadcasts to every feature)
  //   regime.0.stddev = 1,1,2,...
  //   regime.0.perturbation = 0.3
  static StreamSpec parse(std::istream& in);
  static StreamSpec load(const std::string& path);
};

// Chunk boundaries where the generating regime changes.
GroundTruth ground_truth(const StreamSpec& spec);

// Seeded Gaussian stream. Chunk i is drawn from its own child RNG, so the
// output is bit-deterministic and independent of how far it was consumed.
class StreamGenerator final : public ChunkSource {
 public:
  explicit StreamGenerator(StreamSpec spec);

  std::optional<Chunk> next() override;
  Chunk chunk(std::size_t index) const;
  const GroundTruth& truth() const noexcept { return truth_; }
  const StreamSpec& spec() const noexcept { return spec_; }

  // All chunks stacked into one matrix.
  Matrix materialize() const;

 private:
  StreamSpec spec_;
  GroundTruth truth_;
  std::vector<std::size_t> regime_start_;
  std::size_t cursor_ = 0;
};

struct InterleavedStream {
  Matrix samples;
  GroundTruth truth;
};

// Alternates period rows of a with period rows of b until one runs out.
// Every chunk that contains an exchange row is marked in the ground truth.
InterleavedStream interleave_datasets(const Matrix& a, const Matrix& b, std::size_t period,
                                      std::size_t chunk_size);
InterleavedStream interleave_datasets(const std::string& path_a, const std::string& path_b,
                                      std::size_t period, std::size_t chunk_size);

}  // namespace topodrift

#endif  // TOPODRIFT_STREAM_HPP_
