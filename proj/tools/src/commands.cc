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

#include "commands.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>

#include "CLI11.hpp"
#include "medlens/error.h"
#include "medlens/evaluate.h"
#include "medlens/ingest.h"
#include "medlens/interpolate.h"
#include "medlens/quality.h"
#include "medlens/random.h"
#include "medlens/resample.h"
#include "medlens/synth.h"

#ifndef MEDLENS_VERSION
#define MEDLENS_VERSION "unknown"
#endif

namespace medlens::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Picks the series written to fills.csv.
constexpr std::uint64_t kFillSampleStream = 0xF1115A0000000005ULL;

// Everything except the "execution" block is a pure function of the
// configuration and the input bytes.
class Manifest {
 public:
  Manifest(std::string command, const CliConfig& config) : config_(config) {
    doc_["tool"] = "medlens";
    doc_["version"] = MEDLENS_VERSION;
    doc_["command"] = std::move(command);
    doc_["seed"] = config.seed;
    doc_["config"] = snapshot(config);
    doc_["inputs"] = Json::array();
    doc_["results"] = Json::object();
  }

  void input(const std::string& role, const fs::path& path) {
    doc_["inputs"].push_back({{"role", role},
                              {"path", path.string()},
                              {"bytes", fs::file_size(path)},
                              {"sha256", sha256_file(path)}});
  }
  Json& results() { return doc_["results"]; }
  void stage(const std::string& name, double seconds) {
    stages_[name] = seconds;
  }

  void write(const fs::path& dir) {
    doc_["execution"] = {{"workers", config_.workers},
                         {"stage_seconds", stages_}};
    auto out = ingest::open_output(dir / "manifest.json");
    out << doc_.dump(2) << '\n';
    if (!out) throw UsageError("write failed: manifest.json");
  }

 private:
  const CliConfig& config_;
  Json doc_;
  Json stages_ = Json::object();
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void prepare_out(const CliConfig& config) {
  const auto& dir = config.out;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) {
      throw UsageError("output path '" + dir.string() + "' is not a directory");
    }
    if (!fs::is_empty(dir, ec) && !config.force) {
      throw UsageError("output directory '" + dir.string() +
                       "' is not empty; pass --force to overwrite");
    }
  }
  fs::create_directories(dir, ec);
  if (ec) {
    throw UsageError("cannot create output directory '" + dir.string() +
                     "': " + ec.message());
  }
}

void require_path(const fs::path& p, const std::string& key) {
  if (p.empty()) throw UsageError("set " + key + " (or pass --data DIR)");
}

Cohort load_cohort(const CliConfig& config, Manifest& manifest,
                   std::ostream& log) {
  require_path(config.paths.events, "paths.events");
  require_path(config.paths.admissions, "paths.admissions");
  auto read = ingest::read_cohort(config.paths.events, config.paths.admissions,
                                  config.events, config.admissions);
  manifest.input("events", config.paths.events);
  manifest.input("admissions", config.paths.admissions);
  const auto& r = read.report;
  manifest.results()["ingest"] = {{"event_rows", r.event_rows},
                                  {"admission_rows", r.admission_rows},
                                  {"skipped_events", r.skipped_events},
                                  {"skipped_admissions", r.skipped_admissions},
                                  {"notes", r.notes}};
  log << "read " << read.cohort.admissions.size() << " admissions, "
      << read.cohort.events.size() << " events, "
      << read.cohort.signs.size() << " signs";
  if (r.skipped_events + r.skipped_admissions > 0) {
    log << " (skipped " << r.skipped_events << " event rows, "
        << r.skipped_admissions << " admission rows)";
  }
  log << '\n';
  return std::move(read.cohort);
}

std::string cell(const std::optional<double>& v) {
  return v ? ingest::format_double(*v) : std::string();
}

Json metrics_json(const eval::EvalReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
  };
  return {{"interpolation", r.interpolation},
          {"classifier", r.classifier},
          {"accuracy", r.metrics.accuracy},
          {"f1", r.metrics.f1},
          {"auc_roc", opt(r.metrics.auc_roc)},
          {"auc_pr", opt(r.metrics.auc_pr)}};
}

void write_selected(const eval::PipelineResult& result, const fs::path& path) {
  std::map<std::string, const quality::PearsonScore*> by_id;
  for (const auto& p : result.quality.pearson) by_id[p.sign_id] = &p;
  auto out = ingest::open_output(path);
  out << "rank,sign_id,r,abs_r,n_pairs\n";
  for (std::size_t i = 0; i < result.selection.signs.size(); ++i) {
    const auto& id = result.selection.signs[i];
    const auto* p = by_id.at(id);
    out << i + 1 << ',' << ingest::csv_field(id) << ',' << cell(p->r) << ','
        << (p->r ? ingest::format_double(std::abs(*p->r)) : std::string())
        << ',' << p->n_pairs << '\n';
  }
  if (!out) throw UsageError("write failed: " + path.string());
}

void write_coverage(std::size_t k, double coverage, std::size_t records,
                    const fs::path& path) {
  auto out = ingest::open_output(path);
  out << "k_freq,total_records,coverage\n"
      << k << ',' << records << ',' << ingest::format_double(coverage) << '\n';
  if (!out) throw UsageError("write failed: " + path.string());
}

interp::InterpOptions interp_options(const PipelineConfig& p) {
  interp::InterpOptions o;
  o.window = p.window;
  o.variation = p.variation;
  o.forest = p.interpolator;
  o.max_train = p.interp_max_train;
  return o;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw InvariantError("sha256 unavailable");
  }
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

void cmd_synth(const CliConfig& config, std::ostream& log) {
  config.synth.validate();
  prepare_out(config);
  Manifest manifest("synth", config);
  Stopwatch clock;
  const auto gen = synth::generate(config.synth, config.workers);
  manifest.stage("generate", clock.lap());
  ingest::write_cohort(gen.cohort, config.out / "events.csv",
                       config.out / "admissions.csv", config.events,
                       config.admissions);
  synth::write_truth(gen.truth, config.out / "truth.csv",
                     config.out / "informative.csv");
  manifest.stage("write", clock.lap());

  const auto positives =
      std::count(gen.truth.labels.begin(), gen.truth.labels.end(), 1);
  const double prevalence = static_cast<double>(positives) /
                            static_cast<double>(gen.truth.labels.size());
  manifest.results() = {{"admissions", gen.cohort.admissions.size()},
                        {"events", gen.cohort.events.size()},
                        {"signs", gen.cohort.signs.size()},
                        {"prevalence", prevalence},
                        {"informative", gen.truth.informative}};
  manifest.write(config.out);
  log << "wrote " << gen.cohort.admissions.size() << " admissions and "
      << gen.cohort.events.size() << " events to " << config.out.string()
      << " (prevalence " << ingest::format_double(prevalence) << ")\n";
}

void cmd_measure(const CliConfig& config, std::ostream& log) {
  {
    // k_corr plays no part here.
    PipelineConfig p = config.pipeline;
    p.k_corr = std::min(p.k_corr, p.k_freq);
    p.validate();
  }
  prepare_out(config);
  Manifest manifest("measure", config);
  Stopwatch clock;
  Cohort cohort = load_cohort(config, manifest, log);
  manifest.stage("read", clock.lap());
  if (config.pipeline.sample_limit) {
    cohort = eval::sample_admissions(
        std::move(cohort), *config.pipeline.sample_limit,
        derive_seed(config.seed, eval::kSampleStream));
  }
  const auto frequent =
      quality::top_signs_by_count(cohort, config.pipeline.k_freq);
  const double coverage = quality::record_coverage(cohort, frequent);
  const auto set = resample::build_series_set(cohort, frequent,
                                              config.pipeline.hours,
                                              config.workers);
  const auto labels = quality::labels_for(set, cohort);
  manifest.stage("resample", clock.lap());
  const auto report = quality::measure(set, labels, config.workers);
  manifest.stage("measure", clock.lap());

  ingest::write_quality_report(report, config.out / "quality");
  ingest::write_histogram(
      quality::correlation_histogram(report, config.histogram_bin_width),
      config.out / "histogram.csv");
  write_coverage(frequent.size(), coverage, cohort.total_records(),
                 config.out / "coverage.csv");
  manifest.results()["signs_measured"] = frequent.size();
  manifest.results()["admissions_measured"] = set.n_admissions();
  manifest.results()["coverage"] = coverage;
  manifest.write(config.out);
  log << "measured " << frequent.size() << " signs over " << set.n_admissions()
      << " admissions; top-" << frequent.size() << " coverage "
      << ingest::format_double(coverage) << '\n';
}

void cmd_interp_eval(const CliConfig& config, std::ostream& log) {
  if (config.paths.truth.empty()) {
    throw UsageError("interp-eval needs ground truth: set paths.truth");
  }
  config.pipeline.validate();
  prepare_out(config);
  Manifest manifest("interp-eval", config);
  Stopwatch clock;
  const Cohort cohort = load_cohort(config, manifest, log);
  const auto truth_rows = ingest::read_series_matrix(config.paths.truth);
  manifest.input("truth", config.paths.truth);
  if (truth_rows.empty()) throw DataError("ground truth is empty");
  const std::size_t hours = truth_rows.front().size();
  std::map<std::pair<std::string, std::string>, const SignSeries*> truth;
  for (const auto& row : truth_rows) {
    if (!row.complete()) {
      throw DataError("ground truth row '" + row.admission_id() + "/" +
                      row.sign_id() + "' has empty slots");
    }
    truth[{row.admission_id(), row.sign_id()}] = &row;
  }
  manifest.stage("read", clock.lap());

  std::vector<std::string> signs;
  for (const auto& s : cohort.signs) signs.push_back(s.sign_id);
  const auto set =
      resample::build_series_set(cohort, signs, hours, config.workers);
  manifest.stage("resample", clock.lap());
  const auto opts = interp_options(config.pipeline);
  const auto models = interp::train_interpolators(
      set, opts, derive_seed(config.seed, eval::kInterpStream), config.workers);
  manifest.stage("train", clock.lap());
  const auto rf = interp::rf_interpolate_set(set, models, config.workers);
  const auto base = interp::baseline_interpolate_set(set, config.workers);
  manifest.stage("fill", clock.lap());

  auto truth_of = [&](std::size_t i) -> std::span<const double> {
    const auto& s = set.series[i];
    const auto it = truth.find({s.admission_id(), s.sign_id()});
    if (it == truth.end()) {
      throw DataError("ground truth lacks '" + s.admission_id() + "/" +
                      s.sign_id() + "'");
    }
    return it->second->raw();
  };

  struct Methods {
    interp::RmseAccumulator rf, baseline, zero;
  };
  std::vector<Methods> per_sign(set.n_signs());
  Methods all;
  for (std::size_t i = 0; i < set.series.size(); ++i) {
    const auto t = truth_of(i);
    auto& m = per_sign[i % set.n_signs()];
    m.rf.add(rf.series[i], t);
    m.baseline.add(base.series[i], t);
    m.zero.add(interp::zero_fill(set.series[i]), t);
  }
  for (const auto& m : per_sign) {
    all.rf.merge(m.rf);
    all.baseline.merge(m.baseline);
    all.zero.merge(m.zero);
  }
  {
    auto out = ingest::open_output(config.out / "rmse.csv");
    out << "sign_id,method,rmse,n_slots\n";
    auto row = [&](const std::string& id, const char* method,
                   const interp::RmseAccumulator& acc) {
      const auto r = acc.result();
      out << ingest::csv_field(id) << ',' << method << ',' << cell(r.rmse)
          << ',' << r.n_slots << '\n';
    };
    for (std::size_t c = 0; c < set.n_signs(); ++c) {
      row(set.sign_ids[c], "rf", per_sign[c].rf);
      row(set.sign_ids[c], "baseline", per_sign[c].baseline);
      row(set.sign_ids[c], "zero", per_sign[c].zero);
    }
    row("all", "rf", all.rf);
    row("all", "baseline", all.baseline);
    row("all", "zero", all.zero);
    if (!out) throw UsageError("write failed: rmse.csv");
  }

  // Sampled series with at least one filled slot, one row per filled slot.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < set.series.size(); ++i) {
    if (!set.series[i].complete()) candidates.push_back(i);
  }
  Rng rng(derive_seed(config.seed, kFillSampleStream));
  const std::size_t take = std::min(config.sample_series, candidates.size());
  for (std::size_t k = 0; k < take; ++k) {
    std::swap(candidates[k], candidates[k + rng.index(candidates.size() - k)]);
  }
  candidates.resize(take);
  std::sort(candidates.begin(), candidates.end());
  std::size_t fill_rows = 0;
  {
    auto out = ingest::open_output(config.out / "fills.csv");
    out << "admission_id,sign_id,t,truth,rf,rf_source,baseline,"
           "baseline_source,zero\n";
    for (const auto i : candidates) {
      const auto& s = set.series[i];
      const auto t = truth_of(i);
      for (std::size_t h = 0; h < s.size(); ++h) {
        if (s.observed(h)) continue;
        ++fill_rows;
        out << ingest::csv_field(s.admission_id()) << ','
            << ingest::csv_field(s.sign_id()) << ',' << h << ','
            << ingest::format_double(t[h]) << ','
            << ingest::format_double(rf.series[i].series.value(h)) << ','
            << interp::provenance_code(rf.series[i].provenance[h]) << ','
            << ingest::format_double(base.series[i].series.value(h)) << ','
            << interp::provenance_code(base.series[i].provenance[h])
            << ",0.0\n";
      }
    }
    if (!out) throw UsageError("write failed: fills.csv");
  }
  manifest.stage("write", clock.lap());

  auto rmse_json = [](const interp::RmseAccumulator& acc) {
    const auto r = acc.result();
    return r.rmse ? Json(*r.rmse) : Json(nullptr);
  };
  manifest.results() = {{"hours", hours},
                        {"filled_slots", all.rf.result().n_slots},
                        {"rmse_rf", rmse_json(all.rf)},
                        {"rmse_baseline", rmse_json(all.baseline)},
                        {"rmse_zero", rmse_json(all.zero)},
                        {"sampled_series", take},
                        {"fill_rows", fill_rows}};
  manifest.write(config.out);
  auto show = [](const interp::RmseAccumulator& acc) {
    const auto r = acc.result();
    return r.rmse ? ingest::format_double(*r.rmse) : std::string("undefined");
  };
  log << "rmse over " << all.rf.result().n_slots << " filled slots: rf "
      << show(all.rf) << ", baseline " << show(all.baseline) << ", zero "
      << show(all.zero) << '\n';
}

void cmd_run(const CliConfig& config, std::ostream& log) {
  config.pipeline.validate();
  prepare_out(config);
  Manifest manifest("run", config);
  Stopwatch clock;
  Cohort cohort = load_cohort(config, manifest, log);
  manifest.stage("read", clock.lap());
  const auto result = eval::run_pipeline(
      config.pipeline, std::move(cohort),
      {config.workers, config.compare_classifiers});
  for (const auto& t : result.timings) manifest.stage(t.stage, t.seconds);
  clock.lap();

  std::vector<eval::EvalReport> reports{result.baseline, result.rf};
  reports.insert(reports.end(), result.extra.begin(), result.extra.end());
  eval::write_eval_csv(reports, config.out / "eval.csv");
  eval::write_summary(result, config.out / "summary.txt");
  write_selected(result, config.out / "selected_signs.csv");
  ingest::write_quality_report(result.quality, config.out / "quality");
  ingest::write_histogram(
      quality::correlation_histogram(result.quality, config.histogram_bin_width),
      config.out / "quality" / "histogram.csv");
  {
    auto out = ingest::open_output(config.out / "test_scores.csv");
    out << "admission_id,label,score\n";
    for (std::size_t i = 0; i < result.test_ids.size(); ++i) {
      out << ingest::csv_field(result.test_ids[i]) << ','
          << result.test_labels[i] << ','
          << ingest::format_double(result.rf_scores[i]) << '\n';
    }
    if (!out) throw UsageError("write failed: test_scores.csv");
  }
  eval::save_pipeline(result.pipeline, config.out / "model");
  manifest.stage("write", clock.lap());

  Json evals = Json::array();
  for (const auto& r : reports) evals.push_back(metrics_json(r));
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(result.rf.split_hash));
  manifest.results() = {{"selected_signs", result.selection.signs},
                        {"findings", result.selection.findings},
                        {"n_train", result.rf.n_train},
                        {"n_test", result.rf.n_test},
                        {"split_hash", hash},
                        {"evaluations", evals}};
  manifest.write(config.out);

  auto auc = [](const eval::EvalReport& r) {
    return r.metrics.auc_roc ? ingest::format_double(*r.metrics.auc_roc)
                             : std::string("undefined");
  };
  log << "selected " << result.selection.signs.size() << " signs; AUC-ROC "
      << "baseline " << auc(result.baseline) << ", rf " << auc(result.rf)
      << '\n';
}

void cmd_predict(const CliConfig& config, std::ostream& log) {
  require_path(config.paths.model, "paths.model");
  prepare_out(config);
  Manifest manifest("predict", config);
  Stopwatch clock;
  const auto pipeline = eval::load_pipeline(config.paths.model);
  for (const auto& entry : fs::directory_iterator(config.paths.model)) {
    if (entry.is_regular_file()) manifest.input("model", entry.path());
  }
  const Cohort cohort = load_cohort(config, manifest, log);
  manifest.stage("read", clock.lap());
  const auto scores = eval::score_admissions(pipeline, cohort, config.workers);
  manifest.stage("score", clock.lap());
  auto out = ingest::open_output(config.out / "predictions.csv");
  out << "admission_id,score,predicted\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out << ingest::csv_field(cohort.admissions[i].admission_id) << ','
        << ingest::format_double(scores[i]) << ','
        << (scores[i] >= pipeline.threshold ? 1 : 0) << '\n';
  }
  if (!out) throw UsageError("write failed: predictions.csv");
  manifest.results() = {{"admissions", scores.size()}};
  manifest.write(config.out);
  log << "scored " << scores.size() << " admissions\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"medlens: clinical time-series quality, interpolation and "
               "mortality prediction"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<std::string> data_dir;
  std::vector<std::string> sets;
  bool force = false;
  app.add_option("--config", config_file, "JSON configuration file");
  app.add_option("--seed", seed, "Root seed");
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--data", data_dir,
                 "Directory holding events.csv, admissions.csv, truth.csv");
  app.add_option("--set", sets, "Config override key=value (repeatable)");
  app.add_flag("--force", force, "Overwrite a non-empty output directory");

  using Command = void (*)(const CliConfig&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"synth", cmd_synth},           {"measure", cmd_measure},
      {"interp-eval", cmd_interp_eval}, {"run", cmd_run},
      {"predict", cmd_predict}};
  const char* help[] = {"Generate a synthetic cohort with ground truth",
                        "Write missing-rate metrics and correlations",
                        "Compare interpolators against ground truth",
                        "Run the full pipeline and persist the model",
                        "Score admissions with a persisted pipeline"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    subs.push_back(app.add_subcommand(commands[i].first, help[i]));
  }
  auto* defaults = app.add_subcommand("defaults", "Print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    FlagOverrides flags;
    flags.seed = seed;
    flags.workers = workers;
    if (out_dir) flags.out = *out_dir;
    if (data_dir) flags.data_dir = *data_dir;
    flags.force = force;
    std::optional<fs::path> file;
    if (config_file) file = *config_file;
    const CliConfig config = load_config(file, sets, flags);
    if (defaults->parsed()) {
      out << default_json().dump(2) << '\n';
      return kExitOk;
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) commands[i].second(config, err);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace medlens::cli
