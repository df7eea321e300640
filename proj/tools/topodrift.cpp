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

// topodrift command-line tool. Talks to the library only through the C API.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "topodrift/topodrift.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// Thrown after a diagnostic has been printed; carries the exit code.
struct Exit {
  int code;
};

[[noreturn]] void die(int code, const std::string& msg) {
  std::cerr << "topodrift: " << msg << '\n';
  throw Exit{code};
}

void check(td_status s, const std::string& what) {
  if (s == TD_OK) return;
  die(s == TD_ERROR_IO ? kExitIo : kExitValidation, what + ": " + td_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
template <class T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, Deleter<T, Free>>;

using MatrixPtr = Handle<td_matrix, td_matrix_free>;
using IndicesPtr = Handle<td_indices, td_indices_free>;
using SpecPtr = Handle<td_stream_spec, td_stream_spec_free>;
using MapPtr = Handle<td_map, td_map_free>;
using SignalPtr = Handle<td_signal, td_signal_free>;
using PcaPtr = Handle<td_pca, td_pca_free>;
using ReportPtr = Handle<td_report, td_report_free>;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// ---- flat key=value config ----

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) die(kExitIo, "cannot read config file: " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      die(kExitValidation, path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// Config entries become long flags placed before the user's own arguments;
// every option keeps its last value, so the command line wins.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::optional<std::string> config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (!config || args.size() < 2) return args;
  std::vector<std::string> out{args[0], args[1]};
  for (const auto& [k, v] : read_config(*config)) out.push_back("--" + k + "=" + v);
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

// ---- shared option groups ----

struct Source {
  std::string data;
  std::string spec;
};

struct Common {
  std::uint64_t seed = 0;
  double train_fraction = 0.30;
  std::string config;
};

struct MapOptions {
  std::string kind = "som";
  std::size_t rows = 10;
  std::size_t cols = 10;
  std::string metric = "manhattan";
};

struct ScheduleOptions {
  td_schedule value{};
  std::string neighborhood = "gaussian";
};

void add_source(CLI::App* app, Source& s) {
  app->add_option("--data", s.data, "stream samples as CSV");
  app->add_option("--spec", s.spec, "stream generator spec file");
}

void add_common(CLI::App* app, Common& c, bool with_fraction) {
  app->add_option("--config", c.config, "flat key = value config file");
  app->add_option("--seed", c.seed, "root seed")->capture_default_str();
  if (with_fraction) {
    app->add_option("--train-fraction", c.train_fraction, "leading fraction used for training")
        ->capture_default_str();
  }
}

void add_map(CLI::App* app, MapOptions& m) {
  app->add_option("--map-kind", m.kind, "som or sim")
      ->check(CLI::IsMember({"som", "sim"}))
      ->capture_default_str();
  app->add_option("--grid-rows", m.rows)->capture_default_str();
  app->add_option("--grid-cols", m.cols)->capture_default_str();
  app->add_option("--grid-metric", m.metric)
      ->check(CLI::IsMember({"manhattan", "euclidean", "chebyshev"}))
      ->capture_default_str();
}

void add_schedule(CLI::App* app, ScheduleOptions& s) {
  td_schedule_default(&s.value);
  app->add_option("--epochs", s.value.epochs)->capture_default_str();
  app->add_option("--eta-start", s.value.eta_start)->capture_default_str();
  app->add_option("--eta-end", s.value.eta_end)->capture_default_str();
  app->add_option("--sigma-start", s.value.sigma_start)->capture_default_str();
  app->add_option("--sigma-end", s.value.sigma_end)->capture_default_str();
  app->add_option("--neighborhood", s.neighborhood, "gaussian or dog")
      ->check(CLI::IsMember({"gaussian", "dog"}))
      ->capture_default_str();
  app->add_option("--dog-ratio", s.value.dog_ratio)->capture_default_str();
  app->add_option("--dog-amplitude", s.value.dog_amplitude)->capture_default_str();
}

void add_detector(CLI::App* app, td_detector_config& d) {
  td_detector_config_default(&d);
  app->add_option("--alpha", d.alpha)->capture_default_str();
  app->add_option("--window", d.window)->capture_default_str();
  app->add_option("--chunk-size", d.chunk_size)->capture_default_str();
  app->add_option("--cl-eta", d.cl_eta)->capture_default_str();
  app->add_option("--cl-epochs", d.cl_epochs)->capture_default_str();
}

td_schedule resolve(const ScheduleOptions& s) {
  td_schedule out = s.value;
  out.neighborhood = s.neighborhood == "dog" ? TD_NEIGHBORHOOD_DOG : TD_NEIGHBORHOOD_GAUSSIAN;
  return out;
}

// A loaded stream plus whatever the source knows about it.
struct Stream {
  MatrixPtr samples;
  IndicesPtr truth;  // only for generated streams
  std::size_t spec_chunk_size = 0;
};

Stream load_stream(const Source& src, const CLI::App* app, std::uint64_t seed) {
  if (src.data.empty() == src.spec.empty()) {
    die(kExitValidation, "exactly one of --data and --spec is required");
  }
  Stream s;
  if (!src.data.empty()) {
    td_matrix* m = nullptr;
    check(td_matrix_read_csv(src.data.c_str(), &m), "reading " + src.data);
    s.samples.reset(m);
    return s;
  }
  td_stream_spec* raw = nullptr;
  check(td_stream_spec_load(src.spec.c_str(), &raw), "reading " + src.spec);
  SpecPtr spec(raw);
  if (app->count("--seed") > 0) td_stream_spec_set_seed(spec.get(), seed);
  td_matrix* m = nullptr;
  td_indices* t = nullptr;
  check(td_stream_generate(spec.get(), &m, &t), "generating stream");
  s.samples.reset(m);
  s.truth.reset(t);
  s.spec_chunk_size = td_stream_spec_chunk_size(spec.get());
  return s;
}

void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) die(kExitValidation, "--train-fraction must lie in (0, 1)");
}

std::size_t training_rows(std::size_t rows, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(rows) + 1e-9));
}

// Chunk size from the flag, or from the generator spec when the flag is absent.
std::size_t chunk_size_for(const CLI::App* app, std::size_t flag, const Stream& s) {
  if (app->count("--chunk-size") == 0 && s.spec_chunk_size > 0) return s.spec_chunk_size;
  return flag;
}

std::size_t chunk_count(std::size_t rows, std::size_t chunk) {
  return rows / chunk + (rows % chunk >= 2 ? 1 : 0);
}

// Monitoring starts at the first chunk boundary at or after the training rows.
std::size_t first_monitored_chunk(std::size_t rows, double fraction, std::size_t chunk) {
  const std::size_t train = training_rows(rows, fraction);
  return (train + chunk - 1) / chunk;
}

MatrixPtr leading_rows(const td_matrix* m, std::size_t n) {
  td_matrix* out = nullptr;
  check(td_matrix_slice(m, 0, n, &out), "slicing training rows");
  return MatrixPtr(out);
}

td_map_kind map_kind(const std::string& s) { return s == "sim" ? TD_MAP_SIM : TD_MAP_SOM; }

td_grid_metric grid_metric(const std::string& s) {
  if (s == "euclidean") return TD_GRID_EUCLIDEAN;
  if (s == "chebyshev") return TD_GRID_CHEBYSHEV;
  return TD_GRID_MANHATTAN;
}

MapPtr load_map(const std::string& path) {
  td_map* m = nullptr;
  check(td_map_load(path.c_str(), &m), "reading map " + path);
  return MapPtr(m);
}

IndicesPtr read_indices(const std::string& path) {
  td_indices* t = nullptr;
  check(td_indices_read(path.c_str(), &t), "reading " + path);
  return IndicesPtr(t);
}

std::vector<std::size_t> to_vector(const td_indices* idx) {
  const std::size_t* d = td_indices_data(idx);
  return {d, d + td_indices_size(idx)};
}

// Keeps indices in [first, first + length) and renumbers them from zero.
IndicesPtr rebase(const std::vector<std::size_t>& values, std::size_t first, std::size_t length) {
  std::vector<std::size_t> kept;
  for (const std::size_t v : values) {
    if (v >= first && v - first < length) kept.push_back(v - first);
  }
  td_indices* out = nullptr;
  check(td_indices_create(kept.data(), kept.size(), &out), "building index list");
  return IndicesPtr(out);
}

// ---- commands ----

struct GenerateCmd {
  Common common;
  std::string spec, out, truth_out;

  void attach(CLI::App* app) {
    app->add_option("--config", common.config, "flat key = value config file");
    app->add_option("--seed", common.seed, "overrides the generator seed");
    app->add_option("--spec", spec, "stream generator spec file")->required();
    app->add_option("--out", out, "samples CSV")->required();
    app->add_option("--truth-out", truth_out, "ground-truth shift chunks")->required();
  }

  void run(const CLI::App* app) {
    td_stream_spec* raw = nullptr;
    check(td_stream_spec_load(spec.c_str(), &raw), "reading " + spec);
    SpecPtr s(raw);
    if (app->count("--seed") > 0) td_stream_spec_set_seed(s.get(), common.seed);
    td_matrix* m = nullptr;
    td_indices* t = nullptr;
    check(td_stream_generate(s.get(), &m, &t), "generating stream");
    MatrixPtr samples(m);
    IndicesPtr truth(t);
    check(td_matrix_write_csv(samples.get(), out.c_str()), "writing " + out);
    check(td_indices_write(truth.get(), truth_out.c_str()), "writing " + truth_out);
    std::cout << "rows " << td_matrix_rows(samples.get()) << "\nshifts "
              << td_indices_size(truth.get()) << '\n';
  }
};

struct TrainCmd {
  Common common;
  Source source;
  MapOptions map;
  ScheduleOptions schedule;
  std::string map_out, history_out;

  void attach(CLI::App* app) {
    add_common(app, common, true);
    add_source(app, source);
    add_map(app, map);
    add_schedule(app, schedule);
    app->add_option("--map-out", map_out, "trained map file")->required();
    app->add_option("--history-out", history_out, "per-epoch quantization error");
  }

  void run(const CLI::App* app) {
    check_fraction(common.train_fraction);
    const Stream stream = load_stream(source, app, common.seed);
    const std::size_t n = training_rows(td_matrix_rows(stream.samples.get()),
                                        common.train_fraction);
    if (n == 0) die(kExitValidation, "training fraction selects no rows");
    const MatrixPtr train = leading_rows(stream.samples.get(), n);

    td_map* raw = nullptr;
    check(td_map_init(map.rows, map.cols, grid_metric(map.metric), map_kind(map.kind),
                      train.get(), common.seed, &raw),
          "initialising map");
    MapPtr m(raw);
    const td_schedule sched = resolve(schedule);
    std::vector<double> history(sched.epochs);
    check(td_map_train(m.get(), train.get(), &sched, common.seed, history.data(),
                       history.size()),
          "training map");
    check(td_map_save(m.get(), map_out.c_str()), "writing " + map_out);
    if (!history_out.empty()) {
      std::ofstream h(history_out, std::ios::binary);
      if (!h) die(kExitIo, "cannot open for writing: " + history_out);
      h << "epoch,quantization_error\n";
      for (std::size_t e = 0; e < history.size(); ++e) h << e << ',' << fmt(history[e]) << '\n';
      if (!h.flush()) die(kExitIo, "failed writing: " + history_out);
    }
    std::cout << "training_rows " << n << "\nquantization_error "
              << fmt(history.empty() ? 0.0 : history.back()) << '\n';
  }
};

struct MonitorCmd {
  Common common;
  Source source;
  ScheduleOptions schedule;
  td_detector_config detector{};
  std::string map_in, signal_out, events_out, moments_out, map_out;

  void attach(CLI::App* app) {
    add_common(app, common, true);
    add_source(app, source);
    add_schedule(app, schedule);
    add_detector(app, detector);
    app->add_option("--map", map_in, "trained map file")->required();
    app->add_option("--signal-out", signal_out, "per-chunk signal CSV")->required();
    app->add_option("--events-out", events_out, "shift events, JSON lines")->required();
    app->add_option("--moments-out", moments_out, "per-sample moment vectors CSV");
    app->add_option("--map-out", map_out, "map after continual updates");
  }

  void run(const CLI::App* app) {
    check_fraction(common.train_fraction);
    const Stream stream = load_stream(source, app, common.seed);
    td_detector_config cfg = detector;
    cfg.chunk_size = chunk_size_for(app, detector.chunk_size, stream);
    if (cfg.chunk_size == 0) die(kExitValidation, "--chunk-size must be positive");
    const MapPtr m = load_map(map_in);
    const std::size_t rows = td_matrix_rows(stream.samples.get());
    const std::size_t first = first_monitored_chunk(rows, common.train_fraction, cfg.chunk_size);
    const std::size_t first_row = std::min(rows, first * cfg.chunk_size);
    const td_schedule sched = resolve(schedule);

    td_signal* sig = nullptr;
    td_map* final_map = nullptr;
    check(td_monitor_run(m.get(), stream.samples.get(), first_row, first, &cfg, &sched,
                         common.seed, &sig, map_out.empty() ? nullptr : &final_map),
          "monitoring");
    SignalPtr signal(sig);
    MapPtr after(final_map);
    check(td_signal_write_csv(signal.get(), signal_out.c_str()), "writing " + signal_out);
    check(td_signal_write_events(signal.get(), events_out.c_str()), "writing " + events_out);
    if (!moments_out.empty()) {
      check(td_moments_export(m.get(), stream.samples.get(), first_row, first, cfg.chunk_size,
                              moments_out.c_str()),
            "writing " + moments_out);
    }
    if (after) check(td_map_save(after.get(), map_out.c_str()), "writing " + map_out);

    td_indices* ev = nullptr;
    check(td_signal_events(signal.get(), &ev), "collecting events");
    IndicesPtr events(ev);
    std::cout << "first_chunk " << first << "\nscored_chunks " << td_signal_size(signal.get())
              << "\nevents " << td_indices_size(events.get()) << '\n';
  }
};

struct BaselineCmd {
  Common common;
  Source source;
  std::size_t chunk_size = 200;
  std::size_t components = 4;
  std::size_t bins = 50;
  std::string method = "pca";
  std::string out;

  void attach(CLI::App* app) {
    add_common(app, common, true);
    add_source(app, source);
    app->add_option("--chunk-size", chunk_size)->capture_default_str();
    app->add_option("--components", components, "principal components")
        ->capture_default_str();
    app->add_option("--bins", bins, "cumulative-histogram bins")->capture_default_str();
    app->add_option("--method", method, "pca (kpca is not available)")
        ->check(CLI::IsMember({"pca", "kpca"}))
        ->capture_default_str();
    app->add_option("--out", out, "signal CSV: chunk_index,histogram,ks")->required();
  }

  void run(const CLI::App* app) {
    if (method == "kpca") {
      die(kExitValidation, "kernel PCA is not part of this build; use --method pca");
    }
    check_fraction(common.train_fraction);
    const Stream stream = load_stream(source, app, common.seed);
    const std::size_t cs = chunk_size_for(app, chunk_size, stream);
    if (cs == 0) die(kExitValidation, "--chunk-size must be positive");
    const std::size_t rows = td_matrix_rows(stream.samples.get());
    const std::size_t n = training_rows(rows, common.train_fraction);
    const MatrixPtr train = leading_rows(stream.samples.get(), n);
    const std::size_t first = first_monitored_chunk(rows, common.train_fraction, cs);
    const std::size_t first_row = std::min(rows, first * cs);

    td_pca* raw = nullptr;
    check(td_pca_fit(train.get(), components, 1000, 1e-10, common.seed, &raw), "fitting PCA");
    PcaPtr pca(raw);
    td_signal* h = nullptr;
    td_signal* k = nullptr;
    check(td_baseline_run(pca.get(), stream.samples.get(), first_row, first, cs, bins,
                          TD_BASELINE_HISTOGRAM, 0.0, 0, &h),
          "histogram baseline");
    SignalPtr hist(h);
    check(td_baseline_run(pca.get(), stream.samples.get(), first_row, first, cs, bins,
                          TD_BASELINE_KS, 0.0, 0, &k),
          "KS baseline");
    SignalPtr ks(k);

    std::ofstream f(out, std::ios::binary);
    if (!f) die(kExitIo, "cannot open for writing: " + out);
    f << "chunk_index,histogram,ks\n";
    for (std::size_t i = 0; i < td_signal_size(hist.get()); ++i) {
      td_signal_entry a{}, b{};
      check(td_signal_entry_at(hist.get(), i, &a), "reading signal");
      check(td_signal_entry_at(ks.get(), i, &b), "reading signal");
      f << a.chunk_index << ',' << fmt(a.score) << ',' << fmt(b.score) << '\n';
    }
    if (!f.flush()) die(kExitIo, "failed writing: " + out);
    std::cout << "first_chunk " << first << "\nscored_chunks " << td_signal_size(hist.get())
              << '\n';
  }
};

struct EvaluateCmd {
  Common common;
  Source source;
  ScheduleOptions schedule;
  td_detector_config detector{};
  std::string events, detections, truth, report_out, kappa_out, map_in;
  std::size_t tolerance = 1;
  std::size_t n_chunks = 0;
  std::size_t first_chunk = 0;
  bool grid = false;
  double alpha_min = 2, alpha_max = 28, alpha_step = 2;
  std::size_t window_min = 2, window_max = 24, window_step = 2;
  std::size_t threads = 1;

  void attach(CLI::App* app) {
    add_common(app, common, true);
    add_source(app, source);
    add_schedule(app, schedule);
    add_detector(app, detector);
    app->add_option("--events", events, "shift events, JSON lines");
    app->add_option("--detections", detections, "detected chunk indices, one per line");
    app->add_option("--truth", truth, "ground-truth shift chunks");
    app->add_option("--tolerance", tolerance, "matching tolerance in chunks")
        ->capture_default_str();
    app->add_option("--n-chunks", n_chunks, "stream length in chunks");
    app->add_option("--first-chunk", first_chunk, "first monitored chunk")
        ->capture_default_str();
    app->add_option("--report-out", report_out, "report JSON (stdout if omitted)");
    app->add_flag("--grid", grid, "grid-search alpha and window");
    app->add_option("--map", map_in, "trained map file (grid mode)");
    app->add_option("--alpha-min", alpha_min)->capture_default_str();
    app->add_option("--alpha-max", alpha_max)->capture_default_str();
    app->add_option("--alpha-step", alpha_step)->capture_default_str();
    app->add_option("--window-min", window_min)->capture_default_str();
    app->add_option("--window-max", window_max)->capture_default_str();
    app->add_option("--window-step", window_step)->capture_default_str();
    app->add_option("--threads", threads)->capture_default_str();
    app->add_option("--kappa-out", kappa_out, "Kappa matrix CSV (grid mode)");
  }

  void run(const CLI::App* app) {
    if (grid) {
      run_grid(app);
    } else {
      run_report();
    }
  }

  void run_report() {
    if (events.empty() == detections.empty()) {
      die(kExitValidation, "exactly one of --events and --detections is required");
    }
    if (truth.empty()) die(kExitValidation, "--truth is required");
    IndicesPtr det;
    if (!events.empty()) {
      td_indices* raw = nullptr;
      check(td_events_read(events.c_str(), &raw), "reading " + events);
      det.reset(raw);
    } else {
      det = read_indices(detections);
    }
    const IndicesPtr t = read_indices(truth);
    const auto dv = to_vector(det.get());
    const auto tv = to_vector(t.get());

    std::size_t length = n_chunks;
    if (length == 0) {
      for (const std::size_t v : dv) length = std::max(length, v + 1);
      for (const std::size_t v : tv) length = std::max(length, v + 1);
    }
    if (first_chunk >= length) die(kExitValidation, "--first-chunk lies beyond the stream");
    length -= first_chunk;
    const IndicesPtr d0 = rebase(dv, first_chunk, length);
    const IndicesPtr t0 = rebase(tv, first_chunk, length);

    td_report* raw = nullptr;
    check(td_evaluate(d0.get(), t0.get(), tolerance, length, &raw), "evaluating");
    ReportPtr report(raw);
    if (report_out.empty()) {
      std::cout << "kappa " << fmt(td_report_kappa(report.get())) << "\nrecall "
                << fmt(td_report_recall(report.get())) << "\nfpr "
                << fmt(td_report_fpr(report.get())) << "\nmean_delay "
                << fmt(td_report_mean_delay(report.get())) << '\n';
    } else {
      check(td_report_write_json(report.get(), report_out.c_str()), "writing " + report_out);
    }
  }

  void run_grid(const CLI::App* app) {
    check_fraction(common.train_fraction);
    if (map_in.empty()) die(kExitValidation, "grid mode needs --map");
    if (kappa_out.empty()) die(kExitValidation, "grid mode needs --kappa-out");
    if (!(alpha_step > 0.0) || window_step == 0) die(kExitValidation, "grid steps must be positive");
    const Stream stream = load_stream(source, app, common.seed);
    td_detector_config cfg = detector;
    cfg.chunk_size = chunk_size_for(app, detector.chunk_size, stream);
    if (cfg.chunk_size == 0) die(kExitValidation, "--chunk-size must be positive");

    IndicesPtr t;
    if (!truth.empty()) {
      t = read_indices(truth);
    } else if (stream.truth) {
      t = rebase(to_vector(stream.truth.get()), 0, static_cast<std::size_t>(-1));
    } else {
      die(kExitValidation, "grid mode needs --truth for a CSV stream");
    }

    const std::size_t rows = td_matrix_rows(stream.samples.get());
    const std::size_t total = chunk_count(rows, cfg.chunk_size);
    const std::size_t first = first_monitored_chunk(rows, common.train_fraction, cfg.chunk_size);
    if (first >= total) die(kExitValidation, "no chunks remain after the training rows");
    const std::size_t length = total - first;
    const IndicesPtr local_truth = rebase(to_vector(t.get()), first, length);

    std::vector<double> alphas;
    for (double a = alpha_min; a <= alpha_max + 1e-9 * std::abs(alpha_max); a += alpha_step) {
      alphas.push_back(a);
    }
    std::vector<std::size_t> windows;
    for (std::size_t w = window_min; w <= window_max; w += window_step) windows.push_back(w);
    if (alphas.empty() || windows.empty()) die(kExitValidation, "empty parameter grid");

    const MapPtr m = load_map(map_in);
    const td_schedule sched = resolve(schedule);
    std::vector<double> kappa(alphas.size() * windows.size());
    check(td_grid_search(m.get(), stream.samples.get(), first * cfg.chunk_size, 0,
                         local_truth.get(), length, &cfg, &sched, common.seed, tolerance,
                         alphas.data(), alphas.size(), windows.data(), windows.size(), threads,
                         kappa.data()),
          "grid search");
    check(td_kappa_write_csv(alphas.data(), alphas.size(), windows.data(), windows.size(),
                             kappa.data(), kappa_out.c_str()),
          "writing " + kappa_out);
    std::cout << "cells " << kappa.size() << "\nmax_kappa "
              << fmt(*std::max_element(kappa.begin(), kappa.end())) << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  try {
    const std::vector<std::string> args = expand_config(argc, argv);
    std::vector<char*> cargs;
    for (const auto& a : args) cargs.push_back(const_cast<char*>(a.c_str()));

    CLI::App app{"Distribution-shift monitoring with topographic maps"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", td_version());

    GenerateCmd generate;
    TrainCmd train;
    MonitorCmd monitor;
    BaselineCmd baseline;
    EvaluateCmd evaluate;
    auto* g = app.add_subcommand("generate", "write a synthetic stream and its ground truth");
    auto* t = app.add_subcommand("train", "train a map on the leading fraction of a stream");
    auto* m = app.add_subcommand("monitor", "score the rest of a stream and flag shifts");
    auto* b = app.add_subcommand("baseline", "PCA cumulative-histogram and KS signals");
    auto* e = app.add_subcommand("evaluate", "score detections or grid-search alpha/window");
    generate.attach(g);
    train.attach(t);
    monitor.attach(m);
    baseline.attach(b);
    evaluate.attach(e);

    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& err) {
      const int rc = app.exit(err);
      return rc == 0 ? kExitOk : kExitValidation;
    }

    if (g->parsed()) generate.run(g);
    if (t->parsed()) train.run(t);
    if (m->parsed()) monitor.run(m);
    if (b->parsed()) baseline.run(b);
    if (e->parsed()) evaluate.run(e);
    return kExitOk;
  } catch (const Exit& x) {
    return x.code;
  } catch (const std::exception& ex) {
    std::cerr << "topodrift: " << ex.what() << '\n';
    return kExitValidation;
  }
}
