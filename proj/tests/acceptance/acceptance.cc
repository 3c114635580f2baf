// Copyright 2026 The MedLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Release acceptance checks. Prints one PASS/FAIL/SKIP line per criterion
// and exits nonzero if any criterion fails.
//
//   acceptance            run everything
//   acceptance --list     print criterion names
//   acceptance --only X   run criterion X

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "commands.h"
#include "json.hpp"
#include "medlens/evaluate.h"
#include "medlens/forest.h"
#include "medlens/ingest.h"
#include "medlens/interpolate.h"
#include "medlens/metrics.h"
#include "medlens/quality.h"
#include "medlens/resample.h"
#include "medlens/synth.h"
#include "oracles.h"
#include "temp_dir.h"

namespace medlens::acceptance {
namespace {

namespace fs = std::filesystem;

// ---- pinned tolerances and budgets ---------------------------------------

constexpr double kForestBudget = 10.0;      // seconds
constexpr double kMetricsBudget = 5.0;
constexpr double kQualityBudget = 5.0;
constexpr double kResampleBudget = 5.0;
constexpr double kSelectorBudget = 120.0;
constexpr double kInterpBudget = 180.0;
constexpr double kEndToEndBudget = 600.0;
constexpr double kPerfBudget = 300.0;
constexpr double kPerfClassifierBudget = 60.0;

constexpr double kTreeTol = 1e-10;
constexpr double kMetricsTol = 1e-9;
constexpr double kQualityTol = 1e-12;

constexpr int kSelectorRuns = 100;
constexpr int kSelectorNeeded = 95;

constexpr int kInterpSeeds = 10;
constexpr double kInterpVsZero = 0.8;
constexpr double kInterpVsBaseline = 1.0;

constexpr int kEndToEndSeeds = 10;
constexpr int kEndToEndNeeded = 8;
constexpr double kEndToEndSlack = 0.005;
constexpr double kEndToEndFloor = 0.85;

// Real-data reference values and tolerances.
constexpr double kCoverageRef = 0.5756, kCoverageTol = 0.02;
constexpr double kGcsRef = -0.305, kGcsTol = 0.03;
constexpr double kAucRef = 0.955, kAucTol = 0.02;
constexpr double kAucPrRef = 0.805, kAucPrTol = 0.04;

// ---- harness ----------------------------------------------------------------

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::kFail, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Applies the runtime budget on top of the functional verdict. A zero
// budget only reports the time.
Outcome timed(Outcome o, const Clock& clock, double budget) {
  const double s = clock.seconds();
  if (budget <= 0) {
    o.detail += fmt("; %.1f s", s);
    return o;
  }
  o.detail += fmt("; %.1f s (budget %.0f s)", s, budget);
  if (o.status == Status::kPass && s >= budget) o.status = Status::kFail;
  return o;
}

int workers() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// ---- forest -----------------------------------------------------------------

forest::Dataset random_instance(std::mt19937_64& gen, forest::Task task, bool grid) {
  const std::size_t n = 1 + gen() % 50;
  const std::size_t p = 1 + gen() % 3;
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(p));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : rows[i]) v = grid ? static_cast<double>(gen() % 6) : u(gen);
    y[i] = task == forest::Task::kClassification ? static_cast<double>(gen() % 2)
           : grid ? static_cast<double>(gen() % 4)
                  : u(gen);
  }
  return forest::Dataset::from_rows(rows, y);
}

bool same_tree(const forest::Tree& a, const forest::Tree& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto& x = a.nodes[i];
    const auto& y = b.nodes[i];
    if (x.feature != y.feature || x.left != y.left || x.right != y.right ||
        x.n_samples != y.n_samples || std::abs(x.value - y.value) > kTreeTol) {
      return false;
    }
    if (!x.is_leaf() && std::abs(x.threshold - y.threshold) > kTreeTol) return false;
  }
  return true;
}

Outcome forest_oracle() {
  const Clock clock;
  std::mt19937_64 gen(20260101);
  int trees = 0, sweeps_bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto task =
        trial % 2 ? forest::Task::kClassification : forest::Task::kRegression;
    const auto d = random_instance(gen, task, trial % 3 == 0);
    const std::size_t min_leaf = 1 + gen() % 3;
    const std::size_t depth = 1 + gen() % 6;
    const auto tree =
        forest::fit_tree(d, {1, depth, min_leaf, MtryRule::kAll, false}, task, gen());
    trees += same_tree(tree, oracle::greedy_tree(d, depth, min_leaf, task));

    std::vector<std::uint32_t> rows(d.n_rows());
    for (std::uint32_t i = 0; i < rows.size(); ++i) rows[i] = i;
    for (std::size_t f = 0; f < d.n_features(); ++f) {
      const auto fast = forest::sweep_feature(d, rows, f, task, min_leaf);
      const auto slow = oracle::naive_candidates(d, rows, f, task, min_leaf);
      if (fast.size() != slow.size()) {
        ++sweeps_bad;
        continue;
      }
      for (std::size_t k = 0; k < fast.size(); ++k) {
        worst = std::max(worst, std::abs(fast[k].score - slow[k].score));
        if (fast[k].n_left != slow[k].n_left) ++sweeps_bad;
      }
    }
  }
  const bool ok = trees == 200 && sweeps_bad == 0 && worst <= kTreeTol;
  auto o = fmt("%d/200 trees match node-for-node; max sweep error %.2e (tol %.0e)",
               trees, worst, kTreeTol);
  return timed(ok ? pass(o) : fail(o), clock, kForestBudget);
}

// ---- metrics ----------------------------------------------------------------

Outcome metrics_oracle() {
  const Clock clock;
  std::mt19937_64 gen(77);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 99;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial % 2 ? static_cast<double>(gen() % 10) / 10.0
                       : std::uniform_real_distribution<double>(0, 1)(gen);
      y[i] = static_cast<int>(gen() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    worst = std::max(worst, std::abs(*eval::auc_roc(s, y) - oracle::trapezoid_roc_auc(s, y)));
    worst = std::max(worst,
                     std::abs(*eval::auc_pr(s, y) - oracle::brute_average_precision(s, y)));
  }
  int matrices = 0, bad = 0;
  for (std::size_t tp = 0; tp <= 4; ++tp)
    for (std::size_t fp = 0; fp <= 4; ++fp)
      for (std::size_t tn = 0; tn <= 4; ++tn)
        for (std::size_t fn = 0; fn <= 4; ++fn) {
          if (tp + fp + tn + fn == 0) continue;
          ++matrices;
          const eval::Confusion c{tp, fp, tn, fn};
          const double n = static_cast<double>(tp + fp + tn + fn);
          const double prec = tp + fp ? double(tp) / double(tp + fp) : 0.0;
          const double rec = tp + fn ? double(tp) / double(tp + fn) : 0.0;
          const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
          if (std::abs(eval::f1(c) - f1) > kMetricsTol ||
              std::abs(eval::accuracy(c) - double(tp + tn) / n) > kMetricsTol) {
            ++bad;
          }
        }
  const bool ok = worst <= kMetricsTol && bad == 0;
  auto o = fmt("200 instances, max AUC deviation %.2e (tol %.0e); %d/%d confusion "
               "matrices match",
               worst, kMetricsTol, matrices - bad, matrices);
  return timed(ok ? pass(o) : fail(o), clock, kMetricsBudget);
}

// ---- quality ----------------------------------------------------------------

Outcome quality_formulas() {
  const Clock clock;
  double worst = 0.0;
  int definedness = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = oracle::random_cohort(1000 + seed, {});
    const std::size_t hours = 1 + seed % 48;
    std::vector<std::string> ids;
    std::vector<std::uint32_t> idx;
    for (std::uint32_t s = 0; s < c.signs.size(); ++s) {
      ids.push_back(c.signs[s].sign_id);
      idx.push_back(s);
    }
    const auto set = resample::build_series_set(c, ids, hours);
    const auto r = quality::measure(set, quality::labels_for(set, c));
    const auto b = oracle::brute_quality(c, idx, hours);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      worst = std::max(worst, std::abs(r.metric_a[i].missing_rate - b.metric_a[i]));
      worst = std::max(worst, std::abs(r.metric_b[i].missing_rate - b.metric_b[i]));
      if (r.pearson[i].r.has_value() != b.pearson[i].has_value()) {
        ++definedness;
      } else if (b.pearson[i]) {
        worst = std::max(worst, std::abs(*r.pearson[i].r - *b.pearson[i]));
      }
    }
    for (std::size_t a = 0; a < c.admissions.size(); ++a) {
      worst = std::max(worst, std::abs(r.metric_c[a].missing_rate - b.metric_c[a]));
      worst = std::max(worst, std::abs(r.metric_d[a].missing_rate - b.metric_d[a]));
    }
  }
  const bool ok = worst <= kQualityTol && definedness == 0;
  auto o = fmt("100 cohorts, max deviation %.2e (tol %.0e), %d definedness mismatches",
               worst, kQualityTol, definedness);
  return timed(ok ? pass(o) : fail(o), clock, kQualityBudget);
}

// ---- resampler --------------------------------------------------------------

constexpr std::int64_t kHour = 60;

struct RandomEvents {
  std::vector<SignEvent> events;
  Timestamp discharge;
  std::size_t hours = 0;
};

RandomEvents random_events(std::mt19937_64& gen) {
  RandomEvents r;
  r.hours = std::uniform_int_distribution<std::size_t>(1, 48)(gen);
  r.discharge = Timestamp{std::uniform_int_distribution<std::int64_t>(-100000, 100000)(gen)};
  const int n = std::uniform_int_distribution<int>(0, 40)(gen);
  const auto span = static_cast<std::int64_t>(r.hours + 3) * kHour;
  std::uniform_int_distribution<std::int64_t> back(-kHour, span);
  std::uniform_real_distribution<double> value(-50.0, 50.0);
  for (int i = 0; i < n; ++i) {
    std::int64_t t = r.discharge.minutes - back(gen);
    if (i % 4 == 0) t -= ((t % kHour) + kHour) % kHour;  // exact hour
    r.events.push_back({0, 0, Timestamp{t}, value(gen)});
  }
  return r;
}

Outcome resampler_properties() {
  const Clock clock;
  std::mt19937_64 gen(31337);
  int translation = 0, boundary = 0, range = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto r = random_events(gen);
    resample::GridStats stats;
    const auto base =
        resample::hourly_grid(r.events, r.discharge, r.hours, "a", "s", &stats);

    // Mean in range, slot membership by the interval definition.
    bool ok_range = true, ok_boundary = true;
    for (std::size_t t = 0; t < r.hours; ++t) {
      double lo = 1e300, hi = -1e300;
      std::uint32_t n = 0;
      for (const auto& e : r.events) {
        if (oracle::in_slot(e.charttime.minutes, r.discharge.minutes, r.hours, t)) {
          lo = std::min(lo, e.value);
          hi = std::max(hi, e.value);
          ++n;
        }
      }
      if (n != stats.slot_events[t] || base.observed(t) != (n > 0)) ok_boundary = false;
      if (n > 0 && (base.value(t) < lo || base.value(t) > hi)) ok_range = false;
    }
    const Timestamp end = ceil_to_hour(r.discharge);
    for (const auto& e : r.events) {
      const auto slot = resample::slot_of(e.charttime, end, r.hours);
      if (slot >= 0 && e.charttime.minutes % kHour == 0 &&
          end.minutes - (static_cast<std::int64_t>(r.hours) - 1 - slot) * kHour !=
              e.charttime.minutes) {
        ok_boundary = false;
      }
    }
    range += ok_range;
    boundary += ok_boundary;

    const std::int64_t shift =
        std::uniform_int_distribution<std::int64_t>(-500, 500)(gen) * kHour;
    for (auto& e : r.events) e.charttime.minutes += shift;
    const auto moved = resample::hourly_grid(
        r.events, Timestamp{r.discharge.minutes + shift}, r.hours, "a", "s");
    bool same = moved.grid_end().minutes == base.grid_end().minutes + shift;
    for (std::size_t t = 0; same && t < r.hours; ++t) {
      same = base.at(t) == moved.at(t);
    }
    translation += same;
  }
  const bool ok = translation == 1000 && boundary == 1000 && range == 1000;
  auto o = fmt("1000 event sets: translation %d, boundary %d, mean-in-range %d",
               translation, boundary, range);
  return timed(ok ? pass(o) : fail(o), clock, kResampleBudget);
}

// ---- selector ---------------------------------------------------------------

Outcome selector_recovery() {
  const Clock clock;
  int exact = 0;
  for (int s = 0; s < kSelectorRuns; ++s) {
    synth::SynthSpec spec;
    spec.n_admissions = 2000;
    spec.n_signs = 10;
    spec.n_informative = 2;
    spec.hours = 48;
    spec.rates = {0.5};
    spec.seed = 5000 + static_cast<std::uint64_t>(s);
    spec.keep_truth = false;
    const auto g = synth::generate(spec, workers());
    const auto signs = quality::top_signs_by_count(g.cohort, 10);
    const auto set = resample::build_series_set(g.cohort, signs, spec.hours, workers());
    const auto report = quality::measure(set, quality::labels_for(set, g.cohort));
    auto chosen = quality::select_signs(report, g.cohort, 10, 2).signs;
    std::sort(chosen.begin(), chosen.end());
    exact += chosen == g.truth.informative;
  }
  auto o = fmt("%d/%d runs recover exactly the informative pair (need %d)", exact,
               kSelectorRuns, kSelectorNeeded);
  return timed(exact >= kSelectorNeeded ? pass(o) : fail(o), clock, kSelectorBudget);
}

// ---- interpolation ----------------------------------------------------------

Outcome interpolation_quality() {
  const Clock clock;
  double rf = 0, zero = 0, base = 0;
  for (int s = 0; s < kInterpSeeds; ++s) {
    synth::SynthSpec spec;
    spec.n_admissions = 500;
    spec.n_signs = 3;
    spec.n_informative = 1;
    spec.hours = 48;
    spec.rates = {0.5};
    spec.seed = 700 + static_cast<std::uint64_t>(s);
    const auto g = synth::generate(spec, workers());
    const auto set = resample::build_series_set(g.cohort, g.truth.sign_ids, spec.hours);
    const interp::InterpOptions options;
    const auto models = interp::train_interpolators(set, options, spec.seed, workers());
    const auto filled = interp::rf_interpolate_set(set, models, workers());
    interp::RmseAccumulator a_rf, a_zero, a_base;
    for (std::size_t a = 0; a < set.n_admissions(); ++a) {
      for (std::size_t c = 0; c < set.n_signs(); ++c) {
        const auto truth = g.truth.series(a, c);
        a_rf.add(filled.series[a * set.n_signs() + c], truth);
        a_zero.add(interp::zero_fill(set.at(a, c)), truth);
        a_base.add(interp::baseline_interpolate(set.at(a, c)), truth);
      }
    }
    rf += *a_rf.result().rmse;
    zero += *a_zero.result().rmse;
    base += *a_base.result().rmse;
  }
  const double vs_zero = rf / zero, vs_base = rf / base;
  const bool ok = vs_zero <= kInterpVsZero && vs_base <= kInterpVsBaseline;
  auto o = fmt("mean RMSE rf %.3f, zero %.3f, ffill/bfill %.3f over %d seeds; "
               "ratios %.3f (<= %.1f) and %.3f (<= %.1f)",
               rf / kInterpSeeds, zero / kInterpSeeds, base / kInterpSeeds,
               kInterpSeeds, vs_zero, kInterpVsZero, vs_base, kInterpVsBaseline);
  return timed(ok ? pass(o) : fail(o), clock, kInterpBudget);
}

// ---- end to end -------------------------------------------------------------

Outcome end_to_end() {
  const Clock clock;
  int paired = 0;
  double min_rf = 1.0;
  std::string per_seed;
  for (int s = 0; s < kEndToEndSeeds; ++s) {
    synth::SynthSpec spec;
    spec.n_admissions = 2000;
    spec.n_signs = 10;
    spec.n_informative = 2;
    spec.hours = 48;
    spec.rates = {0.5};
    spec.prevalence = 0.1;
    spec.seed = 900 + static_cast<std::uint64_t>(s);
    spec.keep_truth = false;
    auto g = synth::generate(spec, workers());
    PipelineConfig config;
    config.hours = 48;
    config.k_freq = 10;
    config.k_corr = 4;
    config.seed = spec.seed;
    const auto r = eval::run_pipeline(config, std::move(g.cohort), {workers(), false});
    const double b = r.baseline.metrics.auc_roc.value_or(0.0);
    const double f = r.rf.metrics.auc_roc.value_or(0.0);
    paired += f >= b - kEndToEndSlack;
    min_rf = std::min(min_rf, f);
    per_seed += fmt(" %.3f/%.3f", f, b);
  }
  const bool ok = paired >= kEndToEndNeeded && min_rf >= kEndToEndFloor;
  auto o = fmt("rf >= baseline - %.3f in %d/%d seeds (need %d); min rf AUC %.3f "
               "(floor %.2f); rf/baseline:",
               kEndToEndSlack, paired, kEndToEndSeeds, kEndToEndNeeded, min_rf,
               kEndToEndFloor) +
           per_seed;
  return timed(ok ? pass(o) : fail(o), clock, kEndToEndBudget);
}

// ---- determinism ------------------------------------------------------------

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "medlens");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

// Relative path -> bytes, with the manifest's execution block (worker count
// and wall-clock times) removed.
std::vector<std::pair<std::string, std::string>> snapshot_dir(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root).generic_string();
    std::string bytes = testing::read_file(e.path());
    if (rel == "manifest.json") {
      auto j = nlohmann::ordered_json::parse(bytes);
      j.erase("execution");
      bytes = j.dump(2);
    }
    files.emplace_back(rel, std::move(bytes));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism() {
  const Clock clock;
  testing::TempDir dir;
  const std::vector<std::string> common = {
      "--seed", "17", "--set", "synth.n_admissions=400", "--set", "synth.hours=48",
      "--set", "pipeline.hours=48", "--set", "pipeline.k_freq=10", "--set",
      "pipeline.k_corr=4", "--set", "pipeline.compare_classifiers=true"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = common;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  const auto data = (dir / "data").string();
  if (cli(with({"--out", data, "synth"})) != 0) return fail("synth failed");
  int codes = 0;
  codes += cli(with({"--data", data, "--workers", "1", "--out", (dir / "w1").string(), "run"}));
  codes += cli(with({"--data", data, "--workers", "3", "--out", (dir / "w3").string(), "run"}));
  codes += cli(with({"--data", data, "--workers", "3", "--out", (dir / "w3").string(),
                     "--force", "run"}));
  if (codes != 0) return fail("run exited nonzero");
  const auto a = snapshot_dir(dir / "w1");
  const auto b = snapshot_dir(dir / "w3");
  std::size_t differing = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    differing += a[i] != b[i];
  }
  const bool ok = a.size() == b.size() && differing == 0 && !a.empty();
  auto o = fmt("%zu files compared across --workers 1 and 3 (manifest execution "
               "block excluded), %zu differ",
               a.size(), differing + (a.size() != b.size()));
  return timed(ok ? pass(o) : fail(o), clock, 0);
}

// ---- performance ------------------------------------------------------------

Outcome performance() {
  synth::SynthSpec spec;
  spec.n_admissions = 5000;
  spec.n_signs = 20;
  spec.n_informative = 4;
  spec.hours = 720;
  spec.rates = {0.5};
  spec.seed = 1;
  spec.keep_truth = false;
  const Clock gen_clock;
  auto g = synth::generate(spec, 6);
  const double gen_seconds = gen_clock.seconds();
  const std::size_t events = g.cohort.events.size();

  PipelineConfig config;
  config.hours = 720;
  config.k_freq = 20;
  config.k_corr = 20;
  config.seed = 1;
  const Clock clock;
  const auto r = eval::run_pipeline(config, std::move(g.cohort), {6, false});
  const double total = clock.seconds();
  const bool ok = total < kPerfBudget && r.classifier_seconds < kPerfClassifierBudget;
  auto o = fmt("5000 x 20 x 720 (%zu events), workers 6, %u hardware threads: "
               "pipeline %.1f s (budget %.0f s), classifier %.1f s (budget %.0f s), "
               "rf AUC %.3f; cohort generation %.1f s not counted",
               events, std::thread::hardware_concurrency(), total, kPerfBudget,
               r.classifier_seconds, kPerfClassifierBudget,
               r.rf.metrics.auc_roc.value_or(0.0), gen_seconds);
  return ok ? pass(o) : fail(o);
}

// ---- real data --------------------------------------------------------------

// Expects events.csv and admissions.csv in the MIMIC-III column layout
// (hadm_id, itemid, charttime, valuenum; hadm_id, dischtime,
// hospital_expire_flag) under $MEDLENS_MIMIC_DIR. The GCS Total item id
// defaults to 198 and can be changed with $MEDLENS_GCS_ITEMID.
Outcome real_data() {
  const char* dir = std::getenv("MEDLENS_MIMIC_DIR");
  if (dir == nullptr || *dir == '\0') {
    return {Status::kSkip, "set MEDLENS_MIMIC_DIR to run against MIMIC-III extracts"};
  }
  const char* gcs_env = std::getenv("MEDLENS_GCS_ITEMID");
  const std::string gcs = gcs_env ? gcs_env : "198";
  auto read = ingest::read_cohort(fs::path(dir) / "events.csv",
                                  fs::path(dir) / "admissions.csv");
  PipelineConfig config;
  const auto top = quality::top_signs_by_count(read.cohort, config.k_freq);
  const double coverage = quality::record_coverage(read.cohort, top);

  double gcs_r = std::nan("");
  if (read.cohort.find_sign(gcs)) {
    const auto set = resample::build_series_set(read.cohort, {gcs}, config.hours, workers());
    const auto score = quality::pearson_sign_label(set, read.cohort, gcs);
    if (score.r) gcs_r = *score.r;
  }
  const auto r = eval::run_pipeline(config, std::move(read.cohort), {workers(), false});
  const double auc = r.rf.metrics.auc_roc.value_or(0.0);
  const double ap = r.rf.metrics.auc_pr.value_or(0.0);
  const bool ok = std::abs(coverage - kCoverageRef) <= kCoverageTol &&
                  std::abs(gcs_r - kGcsRef) <= kGcsTol &&
                  std::abs(auc - kAucRef) <= kAucTol && std::abs(ap - kAucPrRef) <= kAucPrTol;
  auto o = fmt("top-%zu coverage %.4f (%.4f +- %.2f); GCS r %.3f (%.3f +- %.2f); "
               "AUC-ROC %.3f (%.3f +- %.2f); AUC-PR %.3f (%.3f +- %.2f)",
               config.k_freq, coverage, kCoverageRef, kCoverageTol, gcs_r, kGcsRef,
               kGcsTol, auc, kAucRef, kAucTol, ap, kAucPrRef, kAucPrTol);
  return ok ? pass(o) : fail(o);
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"forest_oracle", forest_oracle},
      {"metrics_oracle", metrics_oracle},
      {"quality_formulas", quality_formulas},
      {"resampler_properties", resampler_properties},
      {"selector_recovery", selector_recovery},
      {"interpolation_quality", interpolation_quality},
      {"end_to_end", end_to_end},
      {"determinism", determinism},
      {"performance", performance},
      {"real_data", real_data},
  };
  return all;
}

int main_impl(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--list") {
      for (const auto& c : criteria()) std::printf("%s\n", c.name);
      return 0;
    }
    if (arg == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--list | --only NAME]\n", argv[0]);
      return 2;
    }
  }
  int failures = 0, ran = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && only != c.name) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Status::kPass   ? "PASS"
                      : o.status == Status::kSkip ? "SKIP"
                                                  : "FAIL";
    failures += o.status == Status::kFail;
    std::printf("%s %s: %s\n", tag, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion named '%s'\n", only.c_str());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace medlens::acceptance

int main(int argc, char** argv) { return medlens::acceptance::main_impl(argc, argv); }
