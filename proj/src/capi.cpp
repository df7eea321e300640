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

#include "topodrift/topodrift.h"

#include <algorithm>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "topodrift/baseline.hpp"
#include "topodrift/detector.hpp"
#include "topodrift/divergence.hpp"
#include "topodrift/embedding.hpp"
#include "topodrift/eval.hpp"
#include "topodrift/stream.hpp"
#include "topodrift/topo_map.hpp"

using namespace topodrift;

struct td_matrix {
  Matrix value;
};
struct td_indices {
  std::vector<std::size_t> value;
};
struct td_stream_spec {
  StreamSpec value;
};
struct td_map {
  FeatureMap value;
};
struct td_detector {
  Detector value;
};
struct td_signal {
  MonitorSignal signal;
  std::vector<ShiftEvent> events;
};
struct td_pca {
  PcaModel value;
};
struct td_report {
  DetectionReport value;
};

namespace {

thread_local std::string g_last_error;

td_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return TD_ERROR_INVALID_ARGUMENT;
    case ErrorCode::kDimensionMismatch: return TD_ERROR_DIMENSION_MISMATCH;
    case ErrorCode::kEmptyInput: return TD_ERROR_EMPTY_INPUT;
    case ErrorCode::kParse: return TD_ERROR_PARSE;
    case ErrorCode::kIo: return TD_ERROR_IO;
  }
  return TD_ERROR_INTERNAL;
}

template <class F>
td_status guarded(F&& body) {
  try {
    body();
    return TD_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TD_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TD_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return TD_ERROR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

std::ofstream open_out(const char* path) {
  need(path, "path");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, std::string("cannot open for writing: ") + path);
  return out;
}

void finish(std::ofstream& out, const char* path) {
  out.flush();
  if (!out) fail(ErrorCode::kIo, std::string("failed writing: ") + path);
}

TrainSchedule to_schedule(const td_schedule* s) {
  need(s, "schedule");
  TrainSchedule out;
  out.epochs = s->epochs;
  out.eta_start = s->eta_start;
  out.eta_end = s->eta_end;
  out.sigma_start = s->sigma_start;
  out.sigma_end = s->sigma_end;
  out.neighborhood = s->neighborhood == TD_NEIGHBORHOOD_DOG
                         ? NeighborhoodKind::kDifferenceOfGaussians
                         : NeighborhoodKind::kGaussian;
  out.dog_ratio = s->dog_ratio;
  out.dog_amplitude = s->dog_amplitude;
  return out;
}

DetectorConfig to_config(const td_detector_config* c) {
  need(c, "detector config");
  DetectorConfig out;
  out.alpha = c->alpha;
  out.window = c->window;
  out.chunk_size = c->chunk_size;
  out.cl_eta = c->cl_eta;
  out.cl_epochs = c->cl_epochs;
  return out;
}

td_signal_entry to_entry(const SignalEntry& e) {
  return {1, e.chunk_index, e.score, e.lower, e.upper, e.shift ? 1 : 0};
}

}  // namespace

extern "C" {

const char* td_last_error(void) { return g_last_error.c_str(); }
const char* td_version(void) { return "1.0.0"; }

void td_schedule_default(td_schedule* out) {
  if (!out) return;
  const TrainSchedule d;
  *out = {d.epochs,    d.eta_start, d.eta_end,  d.sigma_start, d.sigma_end,
          TD_NEIGHBORHOOD_GAUSSIAN, d.dog_ratio, d.dog_amplitude};
}

void td_detector_config_default(td_detector_config* out) {
  if (!out) return;
  const DetectorConfig d;
  *out = {d.alpha, d.window, d.chunk_size, d.cl_eta, d.cl_epochs};
}

// ---- matrices ----

td_status td_matrix_create(size_t rows, size_t cols, const double* data, td_matrix** out) {
  return guarded([&] {
    need(out, "out");
    if (rows * cols > 0) need(data, "data");
    std::vector<double> values(data, data + rows * cols);
    *out = new td_matrix{Matrix(rows, cols, std::move(values))};
  });
}

td_status td_matrix_read_csv(const char* path, td_matrix** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new td_matrix{read_csv(std::string(path))};
  });
}

td_status td_matrix_write_csv(const td_matrix* m, const char* path) {
  return guarded([&] {
    need(m, "matrix");
    auto out = open_out(path);
    write_csv(out, m->value);
    finish(out, path);
  });
}

td_status td_matrix_slice(const td_matrix* m, size_t begin, size_t end, td_matrix** out) {
  return guarded([&] {
    need(m, "matrix");
    need(out, "out");
    *out = new td_matrix{m->value.slice_rows(begin, end)};
  });
}

size_t td_matrix_rows(const td_matrix* m) { return m ? m->value.rows() : 0; }
size_t td_matrix_cols(const td_matrix* m) { return m ? m->value.cols() : 0; }
const double* td_matrix_data(const td_matrix* m) { return m ? m->value.data().data() : nullptr; }
void td_matrix_free(td_matrix* m) { delete m; }

// ---- index lists ----

td_status td_indices_create(const size_t* values, size_t n, td_indices** out) {
  return guarded([&] {
    need(out, "out");
    if (n > 0) need(values, "values");
    *out = new td_indices{std::vector<std::size_t>(values, values + n)};
  });
}

td_status td_indices_read(const char* path, td_indices** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new td_indices{read_truth(path).shift_chunks};
  });
}

td_status td_indices_write(const td_indices* idx, const char* path) {
  return guarded([&] {
    need(idx, "indices");
    auto out = open_out(path);
    write_truth(out, GroundTruth{idx->value});
    finish(out, path);
  });
}

size_t td_indices_size(const td_indices* idx) { return idx ? idx->value.size() : 0; }
const size_t* td_indices_data(const td_indices* idx) {
  return idx ? idx->value.data() : nullptr;
}
void td_indices_free(td_indices* idx) { delete idx; }

// ---- streams ----

td_status td_stream_spec_load(const char* path, td_stream_spec** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new td_stream_spec{StreamSpec::load(path)};
  });
}

td_status td_stream_spec_parse(const char* text, td_stream_spec** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    std::istringstream in(text);
    *out = new td_stream_spec{StreamSpec::parse(in)};
  });
}

size_t td_stream_spec_chunk_size(const td_stream_spec* spec) {
  return spec ? spec->value.chunk_size : 0;
}

size_t td_stream_spec_n_chunks(const td_stream_spec* spec) {
  return spec ? spec->value.n_chunks : 0;
}

void td_stream_spec_set_seed(td_stream_spec* spec, uint64_t seed) {
  if (spec) spec->value.seed = seed;
}

td_status td_stream_generate(const td_stream_spec* spec, td_matrix** samples,
                             td_indices** truth) {
  return guarded([&] {
    need(spec, "spec");
    need(samples, "samples");
    need(truth, "truth");
    StreamGenerator gen(spec->value);
    auto m = std::make_unique<td_matrix>(td_matrix{gen.materialize()});
    auto t = std::make_unique<td_indices>(td_indices{gen.truth().shift_chunks});
    *samples = m.release();
    *truth = t.release();
  });
}

void td_stream_spec_free(td_stream_spec* spec) { delete spec; }

td_status td_stream_interleave(const td_matrix* a, const td_matrix* b, size_t period,
                               size_t chunk_size, td_matrix** samples, td_indices** truth) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(samples, "samples");
    need(truth, "truth");
    auto s = interleave_datasets(a->value, b->value, period, chunk_size);
    auto m = std::make_unique<td_matrix>(td_matrix{std::move(s.samples)});
    auto t = std::make_unique<td_indices>(td_indices{std::move(s.truth.shift_chunks)});
    *samples = m.release();
    *truth = t.release();
  });
}

// ---- maps ----

td_status td_map_init(size_t rows, size_t cols, td_grid_metric metric, td_map_kind kind,
                      const td_matrix* training, uint64_t seed, td_map** out) {
  return guarded([&] {
    need(training, "training");
    need(out, "out");
    GridMetric m = GridMetric::kManhattan;
    if (metric == TD_GRID_EUCLIDEAN) m = GridMetric::kEuclidean;
    if (metric == TD_GRID_CHEBYSHEV) m = GridMetric::kChebyshev;
    const MapKind k = kind == TD_MAP_SIM ? MapKind::kSim : MapKind::kSom;
    *out = new td_map{init_map(GridSpec(rows, cols, m), k, training->value, seed)};
  });
}

td_status td_map_train(td_map* map, const td_matrix* data, const td_schedule* schedule,
                       uint64_t seed, double* error_history, size_t history_capacity) {
  return guarded([&] {
    need(map, "map");
    need(data, "data");
    auto result = train(map->value, data->value, to_schedule(schedule), seed);
    map->value = std::move(result.map);
    if (error_history) {
      const std::size_t n = std::min(history_capacity, result.error_history.size());
      std::copy_n(result.error_history.begin(), n, error_history);
    }
  });
}

td_status td_map_quantization_error(const td_map* map, const td_matrix* data, double* out) {
  return guarded([&] {
    need(map, "map");
    need(data, "data");
    need(out, "out");
    *out = quantization_error(map->value, data->value);
  });
}

td_status td_map_find_winner(const td_map* map, const double* x, size_t n, size_t* row,
                             size_t* col) {
  return guarded([&] {
    need(map, "map");
    need(x, "x");
    const GridPos pos = find_winner(map->value, std::span<const double>(x, n));
    if (row) *row = pos.row;
    if (col) *col = pos.col;
  });
}

td_status td_map_sample_statistic(const td_map* map, const double* x, size_t n, double* out) {
  return guarded([&] {
    need(map, "map");
    need(x, "x");
    need(out, "out");
    *out = sample_statistic(map->value, std::span<const double>(x, n));
  });
}

td_status td_map_moments(const td_map* map, const double* x, size_t n, double out[4]) {
  return guarded([&] {
    need(map, "map");
    need(x, "x");
    need(out, "out");
    const auto m =
        compute_moments(distance_matrix(map->value, std::span<const double>(x, n)).values);
    out[0] = m.mean;
    out[1] = m.variance;
    out[2] = m.skewness;
    out[3] = m.kurtosis;
  });
}

td_status td_map_save(const td_map* map, const char* path) {
  return guarded([&] {
    need(map, "map");
    need(path, "path");
    save_map_file(map->value, path);
  });
}

td_status td_map_load(const char* path, td_map** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new td_map{load_map_file(path)};
  });
}

td_status td_map_clone(const td_map* map, td_map** out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    *out = new td_map{map->value};
  });
}

int td_map_equal(const td_map* a, const td_map* b) {
  if (!a || !b) return 0;
  return a->value == b->value ? 1 : 0;
}

size_t td_map_rows(const td_map* map) { return map ? map->value.grid().rows() : 0; }
size_t td_map_cols(const td_map* map) { return map ? map->value.grid().cols() : 0; }
size_t td_map_input_dim(const td_map* map) { return map ? map->value.input_dim() : 0; }
td_map_kind td_map_get_kind(const td_map* map) {
  return map && map->value.kind() == MapKind::kSim ? TD_MAP_SIM : TD_MAP_SOM;
}
const double* td_map_weights(const td_map* map) {
  return map ? map->value.weights().data().data() : nullptr;
}
void td_map_free(td_map* map) { delete map; }

// ---- detector ----

td_status td_detector_create(const td_map* map, const td_detector_config* config,
                             const td_schedule* schedule, uint64_t seed, td_detector** out) {
  return guarded([&] {
    need(map, "map");
    need(out, "out");
    *out = new td_detector{Detector(map->value, to_config(config), to_schedule(schedule), seed)};
  });
}

td_status td_detector_step(td_detector* det, size_t chunk_index, const double* samples,
                           size_t rows, size_t cols, td_signal_entry* out) {
  return guarded([&] {
    need(det, "detector");
    need(samples, "samples");
    need(out, "out");
    Chunk chunk{chunk_index, Matrix(rows, cols, std::vector<double>(samples, samples + rows * cols))};
    const auto step = det->value.step(chunk);
    if (step.entry) {
      *out = to_entry(*step.entry);
    } else {
      *out = td_signal_entry{0, chunk_index, 0.0, 0.0, 0.0, 0};
    }
  });
}

td_status td_detector_map(const td_detector* det, td_map** out) {
  return guarded([&] {
    need(det, "detector");
    need(out, "out");
    *out = new td_map{det->value.map()};
  });
}

void td_detector_free(td_detector* det) { delete det; }

td_status td_monitor_run(const td_map* map, const td_matrix* stream, size_t first_row,
                         size_t first_chunk_index, const td_detector_config* config,
                         const td_schedule* schedule, uint64_t seed, td_signal** out,
                         td_map** final_map) {
  return guarded([&] {
    need(map, "map");
    need(stream, "stream");
    need(out, "out");
    const DetectorConfig cfg = to_config(config);
    cfg.validate();
    MatrixChunkSource source(stream->value, cfg.chunk_size, first_row, first_chunk_index);
    auto result = run_monitor(source, map->value, cfg, to_schedule(schedule), seed);
    auto sig = std::make_unique<td_signal>(
        td_signal{std::move(result.signal), std::move(result.events)});
    if (final_map) *final_map = new td_map{std::move(result.map)};
    *out = sig.release();
  });
}

// ---- signals ----

size_t td_signal_size(const td_signal* sig) { return sig ? sig->signal.entries.size() : 0; }

td_status td_signal_entry_at(const td_signal* sig, size_t i, td_signal_entry* out) {
  return guarded([&] {
    need(sig, "signal");
    need(out, "out");
    require(i < sig->signal.entries.size(), ErrorCode::kInvalidArgument,
            "signal entry index out of range");
    *out = to_entry(sig->signal.entries[i]);
  });
}

td_status td_signal_events(const td_signal* sig, td_indices** out) {
  return guarded([&] {
    need(sig, "signal");
    need(out, "out");
    std::vector<std::size_t> idx;
    for (const auto& e : sig->events) idx.push_back(e.chunk_index);
    *out = new td_indices{std::move(idx)};
  });
}

td_status td_signal_write_csv(const td_signal* sig, const char* path) {
  return guarded([&] {
    need(sig, "signal");
    auto out = open_out(path);
    write_signal_csv(out, sig->signal);
    finish(out, path);
  });
}

td_status td_signal_write_events(const td_signal* sig, const char* path) {
  return guarded([&] {
    need(sig, "signal");
    auto out = open_out(path);
    write_events_jsonl(out, sig->events);
    finish(out, path);
  });
}

void td_signal_free(td_signal* sig) { delete sig; }

td_status td_events_read(const char* path, td_indices** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::vector<std::size_t> idx;
    for (const auto& e : read_events_jsonl(path)) idx.push_back(e.chunk_index);
    *out = new td_indices{std::move(idx)};
  });
}

td_status td_moments_export(const td_map* map, const td_matrix* stream, size_t first_row,
                            size_t first_chunk_index, size_t chunk_size, const char* path) {
  return guarded([&] {
    need(map, "map");
    need(stream, "stream");
    MatrixChunkSource source(stream->value, chunk_size, first_row, first_chunk_index);
    std::vector<MomentRecord> records;
    while (auto chunk = source.next()) {
      for (const auto& m : chunk_moments(map->value, chunk->samples)) {
        records.push_back({chunk->index, m});
      }
    }
    auto out = open_out(path);
    write_moments_csv(out, records);
    finish(out, path);
  });
}

td_status td_kl_gaussian(double mean_p, double var_p, double mean_q, double var_q, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = kl_gaussian({mean_p, var_p, 0}, {mean_q, var_q, 0});
  });
}

// ---- PCA baseline ----

td_status td_pca_fit(const td_matrix* data, size_t k, size_t max_iters, double tol,
                     uint64_t seed, td_pca** out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    *out = new td_pca{fit_pca(data->value, k, max_iters, tol, seed)};
  });
}

size_t td_pca_components(const td_pca* pca) { return pca ? pca->value.components.rows() : 0; }
const double* td_pca_explained_variance(const td_pca* pca) {
  return pca ? pca->value.explained_variance.data() : nullptr;
}

td_status td_pca_project(const td_pca* pca, const td_matrix* data, td_matrix** out) {
  return guarded([&] {
    need(pca, "pca");
    need(data, "data");
    need(out, "out");
    *out = new td_matrix{project(pca->value, data->value)};
  });
}

void td_pca_free(td_pca* pca) { delete pca; }

td_status td_ks_statistic(const double* a, size_t na, const double* b, size_t nb, double* out) {
  return guarded([&] {
    need(out, "out");
    if (na) need(a, "a");
    if (nb) need(b, "b");
    *out = ks_statistic(std::span<const double>(a, na), std::span<const double>(b, nb));
  });
}

td_status td_baseline_run(const td_pca* pca, const td_matrix* stream, size_t first_row,
                          size_t first_chunk_index, size_t chunk_size, size_t n_bins,
                          td_baseline_metric metric, double alpha, size_t window,
                          td_signal** out) {
  return guarded([&] {
    need(pca, "pca");
    need(stream, "stream");
    need(out, "out");
    std::optional<DecisionRule> rule;
    if (window > 0) rule = DecisionRule{alpha, window};
    MatrixChunkSource source(stream->value, chunk_size, first_row, first_chunk_index);
    auto signals = run_baseline(source, pca->value, n_bins, rule);
    auto& chosen = metric == TD_BASELINE_KS ? signals.ks : signals.histogram;
    *out = new td_signal{std::move(chosen), {}};
  });
}

// ---- evaluation ----

td_status td_evaluate(const td_indices* detected, const td_indices* truth, size_t tol,
                      size_t length, td_report** out) {
  return guarded([&] {
    need(detected, "detected");
    need(truth, "truth");
    need(out, "out");
    *out = new td_report{evaluate(detected->value, truth->value, tol, length)};
  });
}

double td_report_kappa(const td_report* r) { return r ? r->value.kappa : 0.0; }
double td_report_recall(const td_report* r) { return r ? r->value.recall : 0.0; }
double td_report_fpr(const td_report* r) { return r ? r->value.fpr : 0.0; }
double td_report_mean_delay(const td_report* r) { return r ? r->value.mean_delay : 0.0; }
size_t td_report_matched_count(const td_report* r) {
  return r ? r->value.matched_pairs.size() : 0;
}

td_status td_report_write_json(const td_report* r, const char* path) {
  return guarded([&] {
    need(r, "report");
    auto out = open_out(path);
    write_report_json(out, r->value);
    finish(out, path);
  });
}

void td_report_free(td_report* r) { delete r; }

td_status td_grid_search(const td_map* map, const td_matrix* stream, size_t first_row,
                         size_t first_chunk_index, const td_indices* truth, size_t length,
                         const td_detector_config* base, const td_schedule* schedule,
                         uint64_t seed, size_t tol, const double* alphas, size_t n_alphas,
                         const size_t* windows, size_t n_windows, size_t threads,
                         double* out_kappa) {
  return guarded([&] {
    need(map, "map");
    need(stream, "stream");
    need(truth, "truth");
    need(alphas, "alphas");
    need(windows, "windows");
    need(out_kappa, "out_kappa");
    GridSearchSetup setup;
    setup.base = to_config(base);
    setup.base.validate();
    const std::size_t chunk_size = setup.base.chunk_size;
    const Matrix* data = &stream->value;
    setup.stream = [=] {
      return std::make_unique<MatrixChunkSource>(*data, chunk_size, first_row,
                                                 first_chunk_index);
    };
    const FeatureMap* initial = &map->value;
    setup.map = [=] { return *initial; };
    setup.truth = GroundTruth{truth->value};
    setup.length = length;
    setup.schedule = to_schedule(schedule);
    setup.seed = seed;
    setup.tol = tol;
    setup.threads = threads;
    const auto m = grid_search(setup, std::span<const double>(alphas, n_alphas),
                               std::span<const std::size_t>(windows, n_windows));
    std::copy(m.values.begin(), m.values.end(), out_kappa);
  });
}

td_status td_kappa_write_csv(const double* alphas, size_t n_alphas, const size_t* windows,
                             size_t n_windows, const double* values, const char* path) {
  return guarded([&] {
    need(alphas, "alphas");
    need(windows, "windows");
    need(values, "values");
    KappaMatrix m{{alphas, alphas + n_alphas},
                  {windows, windows + n_windows},
                  {values, values + n_alphas * n_windows}};
    auto out = open_out(path);
    write_kappa_csv(out, m);
    finish(out, path);
  });
}

}  // extern "C"
