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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Signals and Kappa matrices are
// written to the working directory for plotting.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "topodrift/topodrift.h"

namespace {

namespace fs = std::filesystem;

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

void ok(td_status s, const char* what) {
  if (s != TD_OK) throw std::runtime_error(std::string(what) + ": " + td_last_error());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int failures = 0;

void verdict(int n, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------
// Shift-schedule stream: 20 features, chunks of 100. A stationary stretch of
// 80 chunks is followed by alternating 20-chunk regimes in which features
// 0-4 move from mean 0 to mean 2 and back. The first 60 chunks (30% of the
// stream) train the map; the remaining 140 are monitored and renumbered from
// zero, which puts the shifts at 20, 40, ..., 120.

constexpr std::size_t kChunk = 100;
constexpr std::size_t kTrainRows = 6000;
constexpr std::size_t kMonitored = 140;
const std::vector<std::size_t> kTruth{20, 40, 60, 80, 100, 120};

std::string schedule_spec(std::uint64_t seed) {
  std::ostringstream s;
  s << "n_features = 20\nchunk_size = 100\nn_chunks = 200\nseed = " << seed << "\n";
  for (int k = 0; k < 7; ++k) {
    s << "regime." << k << ".duration = " << (k == 0 ? 80 : 20) << "\n";
    if (k % 2 == 1) s << "regime." << k << ".mean = 2,2,2,2,2,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n";
  }
  return s.str();
}

struct Pipeline {
  MatrixPtr samples;
  MatrixPtr train_rows;
  MapPtr map;
  SignalPtr signal;
  IndicesPtr events;
  double kappa = 0.0, recall = 0.0, fpr = 0.0;
  double seconds = 0.0;
};

td_schedule default_schedule() {
  td_schedule s;
  td_schedule_default(&s);
  return s;
}

td_detector_config monitor_config() {
  td_detector_config c;
  td_detector_config_default(&c);
  c.alpha = 5.0;
  c.window = 8;
  c.chunk_size = kChunk;
  return c;
}

IndicesPtr truth_indices() {
  td_indices* t = nullptr;
  ok(td_indices_create(kTruth.data(), kTruth.size(), &t), "truth");
  return IndicesPtr(t);
}

Pipeline run_pipeline(std::uint64_t seed, td_map_kind kind) {
  Pipeline p;
  const auto t0 = std::chrono::steady_clock::now();
  td_stream_spec* spec = nullptr;
  ok(td_stream_spec_parse(schedule_spec(seed).c_str(), &spec), "spec");
  SpecPtr spec_ptr(spec);
  td_matrix* samples = nullptr;
  td_indices* generated_truth = nullptr;
  ok(td_stream_generate(spec, &samples, &generated_truth), "generate");
  p.samples.reset(samples);
  td_indices_free(generated_truth);

  td_matrix* head = nullptr;
  ok(td_matrix_slice(samples, 0, kTrainRows, &head), "slice");
  p.train_rows.reset(head);
  td_map* map = nullptr;
  ok(td_map_init(10, 10, TD_GRID_MANHATTAN, kind, head, seed, &map), "init");
  p.map.reset(map);
  const td_schedule sched = default_schedule();
  ok(td_map_train(map, head, &sched, seed, nullptr, 0), "train");

  const td_detector_config cfg = monitor_config();
  td_signal* signal = nullptr;
  ok(td_monitor_run(map, samples, kTrainRows, 0, &cfg, &sched, seed, &signal, nullptr),
     "monitor");
  p.signal.reset(signal);
  td_indices* events = nullptr;
  ok(td_signal_events(signal, &events), "events");
  p.events.reset(events);
  p.seconds = seconds_since(t0);

  IndicesPtr truth = truth_indices();
  td_report* report = nullptr;
  ok(td_evaluate(events, truth.get(), 1, kMonitored, &report), "evaluate");
  ReportPtr r(report);
  p.kappa = td_report_kappa(report);
  p.recall = td_report_recall(report);
  p.fpr = td_report_fpr(report);
  return p;
}

bool detection_ok(const Pipeline& p) {
  return p.kappa >= 0.8 && p.recall >= 5.0 / 6.0 && p.fpr <= 0.05;
}

double spike_ratio(const td_signal* sig) {
  std::vector<double> shift, stationary;
  for (std::size_t i = 0; i < td_signal_size(sig); ++i) {
    td_signal_entry e;
    ok(td_signal_entry_at(sig, i, &e), "entry");
    const bool is_shift = std::find(kTruth.begin(), kTruth.end(), e.chunk_index) != kTruth.end();
    (is_shift ? shift : stationary).push_back(e.score);
  }
  return median(shift) / median(stationary);
}

struct Grid {
  std::vector<double> alphas;
  std::vector<std::size_t> windows;
  std::vector<double> kappa;
  double seconds = 0.0;
};

Grid run_grid(const Pipeline& p, std::uint64_t seed, const char* csv) {
  Grid g;
  for (int a = 2; a <= 28; a += 2) g.alphas.push_back(a);
  for (std::size_t w = 2; w <= 24; w += 2) g.windows.push_back(w);
  g.kappa.resize(g.alphas.size() * g.windows.size());
  IndicesPtr truth = truth_indices();
  const td_detector_config cfg = monitor_config();
  const td_schedule sched = default_schedule();
  const auto t0 = std::chrono::steady_clock::now();
  ok(td_grid_search(p.map.get(), p.samples.get(), kTrainRows, 0, truth.get(), kMonitored, &cfg,
                    &sched, seed, 1, g.alphas.data(), g.alphas.size(), g.windows.data(),
                    g.windows.size(), 1, g.kappa.data()),
     "grid search");
  g.seconds = seconds_since(t0);
  ok(td_kappa_write_csv(g.alphas.data(), g.alphas.size(), g.windows.data(), g.windows.size(),
                        g.kappa.data(), csv),
     "kappa csv");
  return g;
}

// ---------------------------------------------------------------------------

double kl_by_quadrature(double mp, double sp, double mq, double sq) {
  constexpr int kSteps = 200000;
  const double lo = mp - 10.0 * sp;
  const double h = 20.0 * sp / kSteps;
  const double c = 0.5 * std::log(2.0 * std::numbers::pi);
  auto f = [&](double x) {
    const double zp = (x - mp) / sp, zq = (x - mq) / sq;
    const double lp = -0.5 * zp * zp - std::log(sp) - c;
    const double lq = -0.5 * zq * zq - std::log(sq) - c;
    return std::exp(lp) * (lp - lq);
  };
  double acc = 0.5 * (f(lo) + f(lo + 20.0 * sp));
  for (int i = 1; i < kSteps; ++i) acc += f(lo + i * h);
  return acc * h;
}

void criterion_1() {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> mu(-5.0, 5.0), sd(0.1, 3.0);
  struct Pair {
    double mp, sp, mq, sq;
  };
  std::vector<Pair> pairs(100);
  for (auto& p : pairs) p = {mu(rng), sd(rng), mu(rng), sd(rng)};
  std::vector<double> got(pairs.size());
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    ok(td_kl_gaussian(p.mp, p.sp * p.sp, p.mq, p.sq * p.sq, &got[i]), "kl");
  }
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const double want = kl_by_quadrature(p.mp, p.sp, p.mq, p.sq);
    worst = std::max(worst, std::abs(got[i] - want) / std::max(std::abs(want), 1e-300));
  }
  verdict(1, worst < 1e-5 && elapsed < 1.0,
          "max_rel_err=" + fmt("%.3g", worst) + " kl_time_s=" + fmt("%.2g", elapsed));
}

void criterion_2() {
  double a = 0.0, b = 0.0;
  ok(td_kl_gaussian(0, 1, 1, 1, &a), "kl");
  ok(td_kl_gaussian(0, 1, 0, 4, &b), "kl");
  const double want_b = std::log(2.0) + 0.125 - 0.5;
  const double err = std::max(std::abs(a - 0.5), std::abs(b - want_b));
  verdict(2, err <= 1e-12, "kl_mean_shift=" + fmt("%.17g", a) + " kl_var4=" + fmt("%.17g", b));
}

void criterion_7() {
  // Map trained on a stationary N(0, 1) sample in 20 dimensions.
  const char* base =
      "n_features = 20\nchunk_size = 100\nn_chunks = 30\nseed = 7\nregime.0.duration = 30\n";
  td_stream_spec* spec = nullptr;
  ok(td_stream_spec_parse(base, &spec), "spec");
  SpecPtr spec_ptr(spec);
  td_matrix* train_rows = nullptr;
  td_indices* t = nullptr;
  ok(td_stream_generate(spec, &train_rows, &t), "generate");
  MatrixPtr train_ptr(train_rows);
  td_indices_free(t);
  td_map* map = nullptr;
  ok(td_map_init(10, 10, TD_GRID_MANHATTAN, TD_MAP_SOM, train_rows, 7, &map), "init");
  MapPtr map_ptr(map);
  const td_schedule sched = default_schedule();
  ok(td_map_train(map, train_rows, &sched, 7, nullptr, 0), "train");

  // Population A matches the training distribution; B shifts every feature by 2.
  const char* pops =
      "n_features = 20\nchunk_size = 100\nn_chunks = 20\nseed = 8\n"
      "regime.0.duration = 10\nregime.1.duration = 10\nregime.1.mean = 2\n";
  td_stream_spec* pspec = nullptr;
  ok(td_stream_spec_parse(pops, &pspec), "spec");
  SpecPtr pspec_ptr(pspec);
  td_matrix* rows = nullptr;
  ok(td_stream_generate(pspec, &rows, &t), "generate");
  MatrixPtr rows_ptr(rows);
  td_indices_free(t);

  const std::size_t n = td_matrix_rows(rows), p = td_matrix_cols(rows);
  std::vector<double> m1[2], m4[2];
  for (std::size_t r = 0; r < n; ++r) {
    double mom[4];
    ok(td_map_moments(map, td_matrix_data(rows) + r * p, p, mom), "moments");
    const int g = r < n / 2 ? 0 : 1;
    m1[g].push_back(mom[0]);
    m4[g].push_back(mom[3]);
  }
  auto separation = [](const std::vector<double>& a, const std::vector<double>& b) {
    auto stats = [](const std::vector<double>& v) {
      double mean = 0.0, sq = 0.0;
      for (double x : v) mean += x;
      mean /= v.size();
      for (double x : v) sq += (x - mean) * (x - mean);
      return std::pair{mean, sq / v.size()};
    };
    const auto [ma, va] = stats(a);
    const auto [mb, vb] = stats(b);
    return std::abs(ma - mb) / std::sqrt(0.5 * (va + vb));
  };
  const double s1 = separation(m1[0], m1[1]);
  const double s4 = separation(m4[0], m4[1]);
  verdict(7, s1 > 4.0 && s4 < 1.0,
          "m1_separation=" + fmt("%.3f", s1) + " m4_separation=" + fmt("%.3f", s4));
}

void criterion_9() {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  std::normal_distribution<double> g(0.0, 1.0);
  constexpr std::size_t kPerCluster = 1000, kDim = 20;
  std::vector<double> centers(3 * kDim);
  for (double& c : centers) c = u(rng);
  std::vector<double> data(3 * kPerCluster * kDim);
  for (std::size_t i = 0; i < 3 * kPerCluster; ++i) {
    for (std::size_t f = 0; f < kDim; ++f) {
      data[i * kDim + f] = centers[(i % 3) * kDim + f] + g(rng);
    }
  }
  td_matrix* m = nullptr;
  ok(td_matrix_create(3 * kPerCluster, kDim, data.data(), &m), "matrix");
  MatrixPtr m_ptr(m);
  td_map* map = nullptr;
  ok(td_map_init(10, 10, TD_GRID_MANHATTAN, TD_MAP_SOM, m, 4, &map), "init");
  MapPtr map_ptr(map);
  double initial = 0.0;
  ok(td_map_quantization_error(map, m, &initial), "qe");
  const td_schedule sched = default_schedule();
  std::vector<double> history(sched.epochs);
  ok(td_map_train(map, m, &sched, 4, history.data(), history.size()), "train");
  const double ratio = history.back() / initial;
  verdict(9, ratio <= 0.5,
          "qe_initial=" + fmt("%.4f", initial) + " qe_epoch1=" + fmt("%.4f", history.front()) +
              " qe_final=" + fmt("%.4f", history.back()) + " ratio=" + fmt("%.3f", ratio) +
              " ratio_vs_epoch1=" + fmt("%.3f", history.back() / history.front()));
}

int run_quiet(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_10() {
  const auto t0 = std::chrono::steady_clock::now();
  const int code = run_quiet(std::string("\"") + TOPODRIFT_UNIT_TESTS + "\"");
  const double elapsed = seconds_since(t0);
  verdict(10, code == 0 && elapsed < 300.0,
          "unit_suite_exit=" + std::to_string(code) + " seconds=" + fmt("%.1f", elapsed));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_11() {
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("topodrift-accept-" + std::to_string(rd()));
  fs::create_directories(dir);
  std::ofstream(dir / "stream.spec") << schedule_spec(3);
  const std::string cli = std::string("\"") + TOPODRIFT_CLI + "\"";
  const std::string spec = (dir / "stream.spec").string();
  bool ran = true;
  for (int k = 0; k < 2; ++k) {
    const std::string tag = std::to_string(k);
    const fs::path map = dir / ("map" + tag);
    ran &= run_quiet(cli + " train --spec " + spec + " --seed 42 --map-out " + map.string()) == 0;
    ran &= run_quiet(cli + " monitor --spec " + spec + " --seed 42 --map " + map.string() +
                     " --signal-out " + (dir / ("signal" + tag)).string() + " --events-out " +
                     (dir / ("events" + tag)).string()) == 0;
  }
  bool same = ran;
  std::string sizes;
  for (const char* name : {"map", "signal", "events"}) {
    const std::string a = slurp(dir / (std::string(name) + "0"));
    const std::string b = slurp(dir / (std::string(name) + "1"));
    same &= !a.empty() && a == b;
    sizes += std::string(" ") + name + "_bytes=" + std::to_string(a.size());
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  verdict(11, same, std::string("identical=") + (same ? "yes" : "no") + sizes);
}

}  // namespace

int main() {
  try {
    criterion_1();
    criterion_2();

    Pipeline som = run_pipeline(1, TD_MAP_SOM);
    ok(td_signal_write_csv(som.signal.get(), "acceptance_som_signal.csv"), "signal csv");
    verdict(3, detection_ok(som) && som.seconds < 30.0,
            "kappa=" + fmt("%.3f", som.kappa) + " recall=" + fmt("%.3f", som.recall) +
                " fpr=" + fmt("%.4f", som.fpr) + " events=" +
                std::to_string(td_indices_size(som.events.get())) +
                " seconds=" + fmt("%.2f", som.seconds));
    {
      int passed = 0;
      double kappa_sum = 0.0;
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Pipeline p = seed == 1 ? Pipeline{} : run_pipeline(seed, TD_MAP_SOM);
        const bool pass = seed == 1 ? detection_ok(som) : detection_ok(p);
        passed += pass ? 1 : 0;
        kappa_sum += seed == 1 ? som.kappa : p.kappa;
      }
      std::printf("info: criterion-3 detection over seeds 1-20: %d/20 pass, mean kappa %.3f\n",
                  passed, kappa_sum / 20.0);
    }

    const double som_ratio = spike_ratio(som.signal.get());
    verdict(4, som_ratio >= 10.0, "spike_ratio=" + fmt("%.2f", som_ratio));

    const Grid som_grid = run_grid(som, 1, "acceptance_kappa_som.csv");
    const auto good = std::count_if(som_grid.kappa.begin(), som_grid.kappa.end(),
                                    [](double k) { return k >= 0.6; });
    const double som_max = *std::max_element(som_grid.kappa.begin(), som_grid.kappa.end());
    const double share = static_cast<double>(good) / som_grid.kappa.size();
    verdict(5, share >= 0.5 && som_max >= 0.8 && som_grid.seconds < 600.0,
            "cells_ge_0.6=" + std::to_string(good) + "/" + std::to_string(som_grid.kappa.size()) +
                " max=" + fmt("%.3f", som_max) + " seconds=" + fmt("%.1f", som_grid.seconds));

    const Pipeline sim = run_pipeline(1, TD_MAP_SIM);
    const Grid sim_grid = run_grid(sim, 1, "acceptance_kappa_sim.csv");
    const double sim_max = *std::max_element(sim_grid.kappa.begin(), sim_grid.kappa.end());
    verdict(6, sim_max >= 0.6,
            "max=" + fmt("%.3f", sim_max) + " kappa_at_5_8=" + fmt("%.3f", sim.kappa));

    criterion_7();

    {
      td_pca* pca = nullptr;
      ok(td_pca_fit(som.train_rows.get(), 4, 1000, 1e-10, 1, &pca), "pca");
      PcaPtr pca_ptr(pca);
      td_signal* ks = nullptr;
      ok(td_baseline_run(pca, som.samples.get(), kTrainRows, 0, kChunk, 50, TD_BASELINE_KS, 5.0,
                         0, &ks),
         "baseline");
      SignalPtr ks_ptr(ks);
      ok(td_signal_write_csv(ks, "acceptance_pca_ks_signal.csv"), "baseline csv");
      const double pca_ratio = spike_ratio(ks);
      verdict(8, td_signal_size(ks) == kMonitored - 1 && som_ratio >= pca_ratio,
              "som_spike_ratio=" + fmt("%.2f", som_ratio) +
                  " pca_ks_spike_ratio=" + fmt("%.2f", pca_ratio));
    }

    criterion_9();
    criterion_10();
    criterion_11();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
