/*
 * Copyright 2026 The topodrift Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to libtopodrift.
 *
 * Every object crosses the boundary as an opaque handle created by a
 * td_*_create / td_*_load / td_*_read style call and released with the
 * matching td_*_free. Fallible calls return a td_status; on failure the
 * message for the calling thread is available from td_last_error() until
 * the next failing call on that thread. Output handles are only written on
 * TD_OK.
 *
 * Streams passed as a td_matrix are cut into chunks starting at first_row;
 * chunk numbering starts at first_chunk_index. A trailing chunk with fewer
 * than two rows is dropped.
 */

#ifndef TOPODRIFT_TOPODRIFT_H_
#define TOPODRIFT_TOPODRIFT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(TOPODRIFT_BUILDING_LIBRARY)
#define TD_API __attribute__((visibility("default")))
#else
#define TD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum td_status {
  TD_OK = 0,
  TD_ERROR_INVALID_ARGUMENT = 1,
  TD_ERROR_DIMENSION_MISMATCH = 2,
  TD_ERROR_EMPTY_INPUT = 3,
  TD_ERROR_PARSE = 4,
  TD_ERROR_IO = 5,
  TD_ERROR_INTERNAL = 6
} td_status;

TD_API const char* td_last_error(void);
TD_API const char* td_version(void);

typedef struct td_matrix td_matrix;
typedef struct td_indices td_indices;
typedef struct td_stream_spec td_stream_spec;
typedef struct td_map td_map;
typedef struct td_detector td_detector;
typedef struct td_signal td_signal;
typedef struct td_pca td_pca;
typedef struct td_report td_report;

typedef enum td_map_kind { TD_MAP_SOM = 0, TD_MAP_SIM = 1 } td_map_kind;

typedef enum td_grid_metric {
  TD_GRID_MANHATTAN = 0,
  TD_GRID_EUCLIDEAN = 1,
  TD_GRID_CHEBYSHEV = 2
} td_grid_metric;

typedef enum td_neighborhood {
  TD_NEIGHBORHOOD_GAUSSIAN = 0,
  TD_NEIGHBORHOOD_DOG = 1
} td_neighborhood;

typedef enum td_baseline_metric {
  TD_BASELINE_HISTOGRAM = 0,
  TD_BASELINE_KS = 1
} td_baseline_metric;

typedef struct td_schedule {
  size_t epochs;
  double eta_start;
  double eta_end;
  double sigma_start;
  double sigma_end;
  td_neighborhood neighborhood;
  double dog_ratio;
  double dog_amplitude;
} td_schedule;

typedef struct td_detector_config {
  double alpha;
  size_t window;
  size_t chunk_size;
  double cl_eta;
  size_t cl_epochs;
} td_detector_config;

/* One scored chunk. lower/upper are NaN while the decision window fills. */
typedef struct td_signal_entry {
  int has_score; /* 0 for the bootstrap chunk of a detector */
  size_t chunk_index;
  double score;
  double lower;
  double upper;
  int shift;
} td_signal_entry;

TD_API void td_schedule_default(td_schedule* out);
TD_API void td_detector_config_default(td_detector_config* out);

/* ---- matrices (row-major, samples are rows) ---- */
TD_API td_status td_matrix_create(size_t rows, size_t cols, const double* data, td_matrix** out);
TD_API td_status td_matrix_read_csv(const char* path, td_matrix** out);
TD_API td_status td_matrix_write_csv(const td_matrix* m, const char* path);
TD_API td_status td_matrix_slice(const td_matrix* m, size_t begin, size_t end, td_matrix** out);
TD_API size_t td_matrix_rows(const td_matrix* m);
TD_API size_t td_matrix_cols(const td_matrix* m);
TD_API const double* td_matrix_data(const td_matrix* m);
TD_API void td_matrix_free(td_matrix* m);

/* ---- index lists (ground truth, detections) ---- */
TD_API td_status td_indices_create(const size_t* values, size_t n, td_indices** out);
TD_API td_status td_indices_read(const char* path, td_indices** out);
TD_API td_status td_indices_write(const td_indices* idx, const char* path);
TD_API size_t td_indices_size(const td_indices* idx);
TD_API const size_t* td_indices_data(const td_indices* idx);
TD_API void td_indices_free(td_indices* idx);

/* ---- synthetic and replayed streams ---- */
TD_API td_status td_stream_spec_load(const char* path, td_stream_spec** out);
TD_API td_status td_stream_spec_parse(const char* text, td_stream_spec** out);
TD_API size_t td_stream_spec_chunk_size(const td_stream_spec* spec);
TD_API size_t td_stream_spec_n_chunks(const td_stream_spec* spec);
TD_API void td_stream_spec_set_seed(td_stream_spec* spec, uint64_t seed);
TD_API td_status td_stream_generate(const td_stream_spec* spec, td_matrix** samples,
                                    td_indices** truth);
TD_API void td_stream_spec_free(td_stream_spec* spec);
TD_API td_status td_stream_interleave(const td_matrix* a, const td_matrix* b, size_t period,
                                      size_t chunk_size, td_matrix** samples,
                                      td_indices** truth);

/* ---- topographic maps ---- */
TD_API td_status td_map_init(size_t rows, size_t cols, td_grid_metric metric, td_map_kind kind,
                             const td_matrix* training, uint64_t seed, td_map** out);
/* error_history may be NULL; otherwise it receives min(epochs, capacity) values. */
TD_API td_status td_map_train(td_map* map, const td_matrix* data, const td_schedule* schedule,
                              uint64_t seed, double* error_history, size_t history_capacity);
TD_API td_status td_map_quantization_error(const td_map* map, const td_matrix* data,
                                           double* out);
TD_API td_status td_map_find_winner(const td_map* map, const double* x, size_t n, size_t* row,
                                    size_t* col);
TD_API td_status td_map_sample_statistic(const td_map* map, const double* x, size_t n,
                                         double* out);
/* out receives mean, variance, skewness, kurtosis of the distance matrix. */
TD_API td_status td_map_moments(const td_map* map, const double* x, size_t n, double out[4]);
TD_API td_status td_map_save(const td_map* map, const char* path);
TD_API td_status td_map_load(const char* path, td_map** out);
TD_API td_status td_map_clone(const td_map* map, td_map** out);
TD_API int td_map_equal(const td_map* a, const td_map* b);
TD_API size_t td_map_rows(const td_map* map);
TD_API size_t td_map_cols(const td_map* map);
TD_API size_t td_map_input_dim(const td_map* map);
TD_API td_map_kind td_map_get_kind(const td_map* map);
/* neurons x input_dim, row-major over the grid. */
TD_API const double* td_map_weights(const td_map* map);
TD_API void td_map_free(td_map* map);

/* ---- streaming detector ---- */
TD_API td_status td_detector_create(const td_map* map, const td_detector_config* config,
                                    const td_schedule* schedule, uint64_t seed,
                                    td_detector** out);
TD_API td_status td_detector_step(td_detector* det, size_t chunk_index, const double* samples,
                                  size_t rows, size_t cols, td_signal_entry* out);
TD_API td_status td_detector_map(const td_detector* det, td_map** out);
TD_API void td_detector_free(td_detector* det);

/* final_map may be NULL. */
TD_API td_status td_monitor_run(const td_map* map, const td_matrix* stream, size_t first_row,
                                size_t first_chunk_index, const td_detector_config* config,
                                const td_schedule* schedule, uint64_t seed, td_signal** out,
                                td_map** final_map);

/* ---- signals ---- */
TD_API size_t td_signal_size(const td_signal* sig);
TD_API td_status td_signal_entry_at(const td_signal* sig, size_t i, td_signal_entry* out);
TD_API td_status td_signal_events(const td_signal* sig, td_indices** out);
TD_API td_status td_signal_write_csv(const td_signal* sig, const char* path);
TD_API td_status td_signal_write_events(const td_signal* sig, const char* path);
TD_API void td_signal_free(td_signal* sig);
/* Chunk indices of the events stored in a JSON-lines event log. */
TD_API td_status td_events_read(const char* path, td_indices** out);

/* Per-sample moment vectors of every chunk: chunk_index,m1,m2,m3,m4. */
TD_API td_status td_moments_export(const td_map* map, const td_matrix* stream, size_t first_row,
                                   size_t first_chunk_index, size_t chunk_size,
                                   const char* path);

/* ---- divergences ---- */
TD_API td_status td_kl_gaussian(double mean_p, double var_p, double mean_q, double var_q,
                                double* out);

/* ---- PCA baseline ---- */
TD_API td_status td_pca_fit(const td_matrix* data, size_t k, size_t max_iters, double tol,
                            uint64_t seed, td_pca** out);
TD_API size_t td_pca_components(const td_pca* pca);
TD_API const double* td_pca_explained_variance(const td_pca* pca);
TD_API td_status td_pca_project(const td_pca* pca, const td_matrix* data, td_matrix** out);
TD_API void td_pca_free(td_pca* pca);
TD_API td_status td_ks_statistic(const double* a, size_t na, const double* b, size_t nb,
                                 double* out);
/* window == 0 disables the decision rule (bounds NaN, no shifts). */
TD_API td_status td_baseline_run(const td_pca* pca, const td_matrix* stream, size_t first_row,
                                 size_t first_chunk_index, size_t chunk_size, size_t n_bins,
                                 td_baseline_metric metric, double alpha, size_t window,
                                 td_signal** out);

/* ---- evaluation ---- */
TD_API td_status td_evaluate(const td_indices* detected, const td_indices* truth, size_t tol,
                             size_t length, td_report** out);
TD_API double td_report_kappa(const td_report* r);
TD_API double td_report_recall(const td_report* r);
TD_API double td_report_fpr(const td_report* r);
TD_API double td_report_mean_delay(const td_report* r);
TD_API size_t td_report_matched_count(const td_report* r);
TD_API td_status td_report_write_json(const td_report* r, const char* path);
TD_API void td_report_free(td_report* r);

/* out_kappa receives n_alphas x n_windows values, alpha-major. */
TD_API td_status td_grid_search(const td_map* map, const td_matrix* stream, size_t first_row,
                                size_t first_chunk_index, const td_indices* truth,
                                size_t length, const td_detector_config* base,
                                const td_schedule* schedule, uint64_t seed, size_t tol,
                                const double* alphas, size_t n_alphas, const size_t* windows,
                                size_t n_windows, size_t threads, double* out_kappa);
TD_API td_status td_kappa_write_csv(const double* alphas, size_t n_alphas, const size_t* windows,
                                    size_t n_windows, const double* values, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* TOPODRIFT_TOPODRIFT_H_ */
