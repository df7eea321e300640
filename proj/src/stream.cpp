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

#include "topodrift/stream.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>

#include "topodrift/format.hpp"
#include "topodrift/seed.hpp"

namespace topodrift {
namespace {

constexpr std::size_t kMinChunkRows = 2;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// nullopt when any cell is not a finite number.
std::optional<std::vector<double>> parse_numeric_row(std::string_view line) {
  std::vector<double> row;
  for (auto cell : split(line, ',')) {
    const auto v = parse_double(cell);
    if (!v || !std::isfinite(*v)) return std::nullopt;
    row.push_back(*v);
  }
  return row;
}

bool blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

namespace detail {

// Line-level CSV parsing shared by the whole-file and chunked readers.
class CsvLineParser {
 public:
  explicit CsvLineParser(std::string source) : source_(std::move(source)) {}

  // Returns the parsed row, or nullopt for a skipped header/blank line.
  std::optional<std::vector<double>> feed(std::string_view line) {
    ++line_no_;
    if (blank(line)) return std::nullopt;
    auto row = parse_numeric_row(line);
    if (!seen_first_) {
      seen_first_ = true;
      if (!row) return std::nullopt;  // header
    }
    if (!row) {
      fail(ErrorCode::kParse,
           source_ + ": non-numeric cell on line " + std::to_string(line_no_));
    }
    if (cols_ == 0) cols_ = row->size();
    if (row->size() != cols_) {
      fail(ErrorCode::kParse, source_ + ": ragged row on line " + std::to_string(line_no_));
    }
    return row;
  }

 private:
  std::string source_;
  std::size_t line_no_ = 0;
  std::size_t cols_ = 0;
  bool seen_first_ = false;
};

}  // namespace detail

namespace {

std::vector<double> parse_vector(const std::string& key, std::string_view text,
                                 std::size_t n_features) {
  std::vector<double> out;
  for (auto cell : split(text, ',')) {
    const auto v = parse_double(cell);
    if (!v) fail(ErrorCode::kParse, "stream spec: non-numeric value for " + key);
    out.push_back(*v);
  }
  if (out.size() == 1 && n_features > 1) out.assign(n_features, out.front());
  return out;
}

std::size_t parse_count(const std::string& key, std::string_view text) {
  const auto v = parse_double(text);
  if (!v || *v < 0 || std::floor(*v) != *v) {
    fail(ErrorCode::kParse, "stream spec: expected a nonnegative integer for " + key);
  }
  return static_cast<std::size_t>(*v);
}

}  // namespace

MatrixChunkSource::MatrixChunkSource(const Matrix& data, std::size_t chunk_size,
                                     std::size_t first_row, std::size_t first_index)
    : data_(&data), chunk_size_(chunk_size), row_(first_row), index_(first_index) {
  require(chunk_size >= 1, ErrorCode::kInvalidArgument, "chunk size must be positive");
}

std::optional<Chunk> MatrixChunkSource::next() {
  if (row_ >= data_->rows()) return std::nullopt;
  const std::size_t end = std::min(row_ + chunk_size_, data_->rows());
  if (end - row_ < kMinChunkRows) {
    row_ = end;
    return std::nullopt;
  }
  Chunk c{index_++, data_->slice_rows(row_, end)};
  row_ = end;
  return c;
}

CsvChunkReader::CsvChunkReader(const std::string& path, std::size_t chunk_size)
    : in_(path),
      path_(path),
      chunk_size_(chunk_size),
      parser_(std::make_unique<detail::CsvLineParser>(path)) {
  require(chunk_size >= 1, ErrorCode::kInvalidArgument, "chunk size must be positive");
  if (!in_) fail(ErrorCode::kIo, "cannot open CSV file: " + path);
}

std::optional<Chunk> CsvChunkReader::next() {
  Matrix samples;
  std::string line;
  while (samples.rows() < chunk_size_ && std::getline(in_, line)) {
    if (auto row = parser_->feed(line)) samples.append_row(*row);
  }
  if (in_.bad()) fail(ErrorCode::kIo, "read error on " + path_);
  if (samples.rows() < kMinChunkRows) return std::nullopt;
  return Chunk{index_++, std::move(samples)};
}

CsvChunkReader::~CsvChunkReader() = default;

std::unique_ptr<ChunkSource> read_chunks(const std::string& path, std::size_t chunk_size) {
  return std::make_unique<CsvChunkReader>(path, chunk_size);
}

Matrix read_csv(std::istream& in) {
  detail::CsvLineParser parser("CSV input");
  Matrix out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto row = parser.feed(line)) out.append_row(*row);
  }
  return out;
}

Matrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open CSV file: " + path);
  detail::CsvLineParser parser(path);
  Matrix out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto row = parser.feed(line)) out.append_row(*row);
  }
  if (in.bad()) fail(ErrorCode::kIo, "read error on " + path);
  return out;
}

void write_csv(std::ostream& out, const Matrix& data) {
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto row = data.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
}

void write_truth(std::ostream& out, const GroundTruth& truth) {
  for (auto idx : truth.shift_chunks) out << idx << '\n';
}

GroundTruth read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open truth file: " + path);
  GroundTruth truth;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    truth.shift_chunks.push_back(parse_count("truth index", trim(line)));
  }
  std::sort(truth.shift_chunks.begin(), truth.shift_chunks.end());
  return truth;
}

void StreamSpec::validate() const {
  require(n_features >= 1, ErrorCode::kInvalidArgument, "n_features must be positive");
  require(chunk_size >= kMinChunkRows, ErrorCode::kInvalidArgument,
          "chunk_size must be at least 2");
  require(n_chunks >= 1, ErrorCode::kInvalidArgument, "n_chunks must be positive");
  require(!regimes.empty(), ErrorCode::kInvalidArgument, "stream needs at least one regime");
  std::size_t total = 0;
  for (const auto& r : regimes) {
    require(r.mean.size() == n_features && r.stddev.size() == n_features,
            ErrorCode::kInvalidArgument, "regime mean/stddev must have n_features entries");
    require(r.duration >= 1, ErrorCode::kInvalidArgument, "regime duration must be positive");
    for (double s : r.stddev) {
      require(s >= 0.0 && std::isfinite(s), ErrorCode::kInvalidArgument,
              "regime stddev must be finite and nonnegative");
    }
    require(r.perturbation >= 0.0, ErrorCode::kInvalidArgument,
            "regime perturbation must be nonnegative");
    total += r.duration;
  }
  require(total == n_chunks, ErrorCode::kInvalidArgument,
          "regime durations must sum to n_chunks");
  if (transition == TransitionKind::kIncremental) {
    require(blend_chunks >= 1, ErrorCode::kInvalidArgument, "blend_chunks must be positive");
    for (std::size_t k = 1; k < regimes.size(); ++k) {
      require(blend_chunks <= regimes[k].duration, ErrorCode::kInvalidArgument,
              "blend_chunks must not exceed the duration of the regime it blends into");
    }
  }
}

StreamSpec StreamSpec::parse(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kParse, "stream spec: expected key = value on line " +
                                  std::to_string(line_no));
    }
    kv[std::string(trim(view.substr(0, eq)))] = std::string(trim(view.substr(eq + 1)));
  }

  StreamSpec spec;
  std::map<std::size_t, std::map<std::string, std::string>> regime_keys;
  for (const auto& [key, value] : kv) {
    if (key == "n_features") {
      spec.n_features = parse_count(key, value);
    } else if (key == "chunk_size") {
      spec.chunk_size = parse_count(key, value);
    } else if (key == "n_chunks") {
      spec.n_chunks = parse_count(key, value);
    } else if (key == "blend_chunks") {
      spec.blend_chunks = parse_count(key, value);
    } else if (key == "seed") {
      spec.seed = std::stoull(value);
    } else if (key == "transition") {
      if (value == "sudden") {
        spec.transition = TransitionKind::kSudden;
      } else if (value == "incremental") {
        spec.transition = TransitionKind::kIncremental;
      } else {
        fail(ErrorCode::kParse, "stream spec: unknown transition '" + value + "'");
      }
    } else if (key.rfind("regime.", 0) == 0) {
      const auto rest = std::string_view(key).substr(7);
      const auto dot = rest.find('.');
      if (dot == std::string_view::npos) fail(ErrorCode::kParse, "stream spec: bad key " + key);
      const auto idx = parse_count(key, rest.substr(0, dot));
      regime_keys[idx][std::string(rest.substr(dot + 1))] = value;
    } else {
      fail(ErrorCode::kParse, "stream spec: unknown key " + key);
    }
  }

  for (const auto& [idx, fields] : regime_keys) {
    if (idx != spec.regimes.size()) {
      fail(ErrorCode::kParse, "stream spec: regime indices must be contiguous from 0");
    }
    Regime r;
    for (const auto& [field, value] : fields) {
      const std::string key = "regime." + std::to_string(idx) + "." + field;
      if (field == "mean") {
        r.mean = parse_vector(key, value, spec.n_features);
      } else if (field == "stddev") {
        r.stddev = parse_vector(key, value, spec.n_features);
      } else if (field == "perturbation") {
        const auto v = parse_double(value);
        if (!v) fail(ErrorCode::kParse, "stream spec: non-numeric value for " + key);
        r.perturbation = *v;
      } else if (field == "duration") {
        r.duration = parse_count(key, value);
      } else {
        fail(ErrorCode::kParse, "stream spec: unknown key " + key);
      }
    }
    if (r.stddev.empty()) r.stddev.assign(spec.n_features, 1.0);
    if (r.mean.empty()) r.mean.assign(spec.n_features, 0.0);
    spec.regimes.push_back(std::move(r));
  }
  spec.validate();
  return spec;
}

StreamSpec StreamSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open stream spec: " + path);
  return parse(in);
}

GroundTruth ground_truth(const StreamSpec& spec) {
  GroundTruth truth;
  std::size_t start = 0;
  for (std::size_t k = 0; k + 1 < spec.regimes.size(); ++k) {
    start += spec.regimes[k].duration;
    truth.shift_chunks.push_back(start);
  }
  return truth;
}

StreamGenerator::StreamGenerator(StreamSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  truth_ = ground_truth(spec_);
  std::size_t start = 0;
  for (const auto& r : spec_.regimes) {
    regime_start_.push_back(start);
    start += r.duration;
  }
}

std::optional<Chunk> StreamGenerator::next() {
  if (cursor_ >= spec_.n_chunks) return std::nullopt;
  return chunk(cursor_++);
}

Chunk StreamGenerator::chunk(std::size_t index) const {
  require(index < spec_.n_chunks, ErrorCode::kInvalidArgument, "chunk index out of range");
  const auto it = std::upper_bound(regime_start_.begin(), regime_start_.end(), index);
  const std::size_t current = static_cast<std::size_t>(it - regime_start_.begin()) - 1;

  // Fraction of samples drawn from the current regime; the rest come from
  // the previous one while an incremental transition is blending in.
  double new_fraction = 1.0;
  if (spec_.transition == TransitionKind::kIncremental && current > 0) {
    const std::size_t offset = index - regime_start_[current];
    if (offset < spec_.blend_chunks) {
      new_fraction = static_cast<double>(offset + 1) / static_cast<double>(spec_.blend_chunks);
    }
  }

  std::mt19937_64 rng(derive_seed(spec_.seed, SeedPurpose::kStream, index));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Matrix samples(spec_.chunk_size, spec_.n_features);
  for (std::size_t s = 0; s < spec_.chunk_size; ++s) {
    std::size_t source = current;
    if (new_fraction < 1.0 && unit(rng) >= new_fraction) source = current - 1;
    const Regime& r = spec_.regimes[source];
    auto row = samples.row(s);
    for (std::size_t f = 0; f < spec_.n_features; ++f) {
      row[f] = r.mean[f] + r.stddev[f] * normal(rng);
      if (r.perturbation > 0.0) row[f] += r.perturbation * (2.0 * unit(rng) - 1.0);
    }
  }
  return Chunk{index, std::move(samples)};
}

Matrix StreamGenerator::materialize() const {
  Matrix all(spec_.n_chunks * spec_.chunk_size, spec_.n_features);
  for (std::size_t i = 0; i < spec_.n_chunks; ++i) {
    const Chunk c = chunk(i);
    std::copy(c.samples.data().begin(), c.samples.data().end(),
              all.data().begin() + static_cast<std::ptrdiff_t>(i * c.samples.data().size()));
  }
  return all;
}

InterleavedStream interleave_datasets(const Matrix& a, const Matrix& b, std::size_t period,
                                      std::size_t chunk_size) {
  require(period >= 1 && chunk_size >= 1, ErrorCode::kInvalidArgument,
          "period and chunk size must be positive");
  require(a.cols() == b.cols(), ErrorCode::kDimensionMismatch,
          "interleaved datasets must have the same column count");

  InterleavedStream out;
  std::vector<std::size_t> exchanges;
  const Matrix* sources[2] = {&a, &b};
  std::size_t cursor[2] = {0, 0};
  for (std::size_t turn = 0;; ++turn) {
    const std::size_t s = turn % 2;
    const Matrix& src = *sources[s];
    if (cursor[s] >= src.rows()) break;
    if (turn > 0) exchanges.push_back(out.samples.rows());
    const std::size_t take = std::min(period, src.rows() - cursor[s]);
    for (std::size_t r = 0; r < take; ++r) out.samples.append_row(src.row(cursor[s] + r));
    cursor[s] += take;
    if (take < period) break;
  }

  // Only chunks that survive the short-tail rule can carry a label.
  const std::size_t rows = out.samples.rows();
  std::size_t n_chunks = rows / chunk_size;
  if (rows % chunk_size >= kMinChunkRows) ++n_chunks;
  for (const std::size_t row : exchanges) {
    const std::size_t idx = row / chunk_size;
    if (idx == 0 || idx >= n_chunks) continue;
    if (out.truth.shift_chunks.empty() || out.truth.shift_chunks.back() != idx) {
      out.truth.shift_chunks.push_back(idx);
    }
  }
  return out;
}

InterleavedStream interleave_datasets(const std::string& path_a, const std::string& path_b,
                                      std::size_t period, std::size_t chunk_size) {
  return interleave_datasets(read_csv(path_a), read_csv(path_b), period, chunk_size);
}

}  // namespace topodrift
