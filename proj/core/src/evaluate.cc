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

#include "medlens/evaluate.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "medlens/classifiers.h"
#include "medlens/error.h"
#include "medlens/ingest.h"
#include "medlens/parallel.h"
#include "medlens/random.h"
#include "medlens/resample.h"

namespace medlens::eval {
namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTime>& sink) : sink_(sink) {}
  double lap(std::string stage) {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    sink_.push_back({std::move(stage), s});
    return s;
  }

 private:
  std::vector<StageTime>& sink_;
  std::chrono::steady_clock::time_point last_ =
      std::chrono::steady_clock::now();
};

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.index(i)]);
  }
}

std::size_t round_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
}

// Catalog extended by `signs` it lacks, event sign indices remapped.
Cohort with_signs(const Cohort& cohort, std::span<const std::string> signs) {
  Cohort out;
  out.admissions = cohort.admissions;
  out.signs = cohort.signs;
  for (const auto& id : signs) {
    if (!cohort.find_sign(id)) out.signs.push_back({id, 0});
  }
  if (out.signs.size() == cohort.signs.size()) return cohort;
  std::sort(out.signs.begin(), out.signs.end(),
            [](const SignInfo& a, const SignInfo& b) {
              return a.sign_id < b.sign_id;
            });
  std::vector<std::uint32_t> remap(cohort.signs.size());
  for (std::size_t s = 0; s < cohort.signs.size(); ++s) {
    remap[s] = *out.find_sign(cohort.signs[s].sign_id);
  }
  out.events = cohort.events;
  for (auto& e : out.events) e.sign = remap[e.sign];
  return out;
}

SeriesSet select_columns(SeriesSet&& all, std::span<const std::string> signs) {
  SeriesSet out;
  out.hours = all.hours;
  out.admission_ids = all.admission_ids;
  out.sign_ids.assign(signs.begin(), signs.end());
  std::vector<std::size_t> columns;
  for (const auto& id : signs) {
    const auto c = all.sign_column(id);
    if (!c) throw InvariantError("selected sign '" + id + "' not resampled");
    columns.push_back(*c);
  }
  out.series.reserve(out.admission_ids.size() * columns.size());
  for (std::size_t a = 0; a < all.n_admissions(); ++a) {
    for (std::size_t c : columns) out.series.push_back(std::move(all.at(a, c)));
  }
  all = SeriesSet{};
  return out;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return s;
}

std::string optional_cell(const std::optional<double>& v) {
  return v ? ingest::format_double(*v) : std::string();
}

}  // namespace

std::vector<AdmissionVector> assemble_vectors(
    const interp::InterpolatedSet& filled, std::span<const int> labels,
    std::span<const std::string> sign_order) {
  if (sign_order.empty()) throw UsageError("sign order is empty");
  if (labels.size() != filled.admission_ids.size()) {
    throw UsageError("one label per admission required");
  }
  std::vector<std::size_t> columns;
  for (const auto& id : sign_order) {
    const auto it =
        std::find(filled.sign_ids.begin(), filled.sign_ids.end(), id);
    if (it == filled.sign_ids.end()) {
      throw UsageError("sign '" + id + "' is not in the filled set");
    }
    columns.push_back(static_cast<std::size_t>(it - filled.sign_ids.begin()));
  }
  const std::size_t h = filled.hours;
  std::vector<AdmissionVector> out(filled.admission_ids.size());
  for (std::size_t a = 0; a < out.size(); ++a) {
    auto& v = out[a];
    v.admission_id = filled.admission_ids[a];
    v.label = labels[a];
    v.features.resize(columns.size() * h);
    for (std::size_t s = 0; s < columns.size(); ++s) {
      const auto& series = filled.at(a, columns[s]).series;
      if (series.size() != h) {
        throw DataError("series length differs from the grid");
      }
      for (std::size_t t = 0; t < h; ++t) {
        const double x = series.raw()[t];
        if (!std::isfinite(x)) {
          throw DataError("admission '" + v.admission_id + "' sign '" +
                          sign_order[s] + "' slot " + std::to_string(t) +
                          " is missing or non-finite");
        }
        v.features[s * h + t] = x;
      }
    }
  }
  return out;
}

forest::Dataset assemble_dataset(const interp::InterpolatedSet& filled,
                                 std::span<const int> labels,
                                 std::span<const std::size_t> rows) {
  const std::size_t h = filled.hours;
  const std::size_t k = filled.sign_ids.size();
  if (k == 0) throw UsageError("sign order is empty");
  forest::Dataset data(rows.size(), k * h);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t a = rows[r];
    for (std::size_t s = 0; s < k; ++s) {
      const auto raw = filled.at(a, s).series.raw();
      for (std::size_t t = 0; t < h; ++t) {
        if (!std::isfinite(raw[t])) {
          throw DataError("admission '" + filled.admission_ids[a] +
                          "' has a missing or non-finite slot");
        }
        data.set(r, s * h + t, raw[t]);
      }
    }
    data.set_target(r, labels[a]);
  }
  return data;
}

forest::Dataset to_dataset(std::span<const AdmissionVector> vectors) {
  const std::size_t p = vectors.empty() ? 0 : vectors.front().features.size();
  forest::Dataset data(vectors.size(), p);
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    if (vectors[r].features.size() != p) {
      throw UsageError("admission vectors differ in length");
    }
    for (std::size_t f = 0; f < p; ++f) data.set(r, f, vectors[r].features[f]);
    data.set_target(r, vectors[r].label);
  }
  return data;
}

SplitIndices split_indices(std::span<const int> labels, double test_fraction,
                           std::uint64_t seed, bool stratify) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test_fraction must be in (0, 1)");
  }
  Rng rng(seed);
  SplitIndices out;
  auto take = [&](std::vector<std::size_t> members) {
    shuffle(members, rng);
    const std::size_t n_test = round_count(members.size(), test_fraction);
    out.test.insert(out.test.end(), members.begin(),
                    members.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(),
                     members.begin() + static_cast<std::ptrdiff_t>(n_test),
                     members.end());
  };
  if (stratify) {
    std::vector<std::size_t> cls[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != 0 && labels[i] != 1) {
        throw UsageError("labels must be 0 or 1");
      }
      cls[labels[i]].push_back(i);
    }
    if (cls[0].size() < 2 || cls[1].size() < 2) {
      throw DataError("stratified split needs at least two admissions per "
                      "class (have " + std::to_string(cls[0].size()) + " and " +
                      std::to_string(cls[1].size()) + ")");
    }
    take(std::move(cls[0]));
    take(std::move(cls[1]));
  } else {
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    take(std::move(all));
  }
  if (out.train.empty() || out.test.empty()) {
    throw DataError("split leaves an empty train or test side");
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<std::vector<AdmissionVector>, std::vector<AdmissionVector>> split(
    std::span<const AdmissionVector> vectors, double test_fraction,
    std::uint64_t seed, bool stratify) {
  std::vector<int> labels;
  labels.reserve(vectors.size());
  for (const auto& v : vectors) labels.push_back(v.label);
  const auto idx = split_indices(labels, test_fraction, seed, stratify);
  std::pair<std::vector<AdmissionVector>, std::vector<AdmissionVector>> out;
  for (auto i : idx.train) out.first.push_back(vectors[i]);
  for (auto i : idx.test) out.second.push_back(vectors[i]);
  return out;
}

std::uint64_t split_hash(std::span<const std::string> test_ids) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001B3ULL;
  };
  for (const auto& id : test_ids) {
    for (char c : id) feed(static_cast<unsigned char>(c));
    feed('\n');
  }
  return h;
}

Scored train_and_score(const forest::Dataset& train,
                       const forest::Dataset& test, const ForestParams& params,
                       std::uint64_t seed, int workers) {
  ForestClassifier clf(params, seed, workers);
  clf.fit(train);
  Scored out;
  out.scores = clf.score(test);
  out.model = clf.release();
  return out;
}

Cohort sample_admissions(Cohort cohort, std::size_t limit, std::uint64_t seed) {
  const std::size_t n = cohort.admissions.size();
  if (n <= limit) return cohort;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < limit; ++i) {
    std::swap(order[i], order[i + rng.index(n - i)]);
  }
  order.resize(limit);
  std::sort(order.begin(), order.end());

  constexpr auto kDropped = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> remap(n, kDropped);
  Cohort out;
  out.signs = std::move(cohort.signs);
  out.admissions.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) {
    remap[order[i]] = static_cast<std::uint32_t>(i);
    out.admissions.push_back(std::move(cohort.admissions[order[i]]));
  }
  std::size_t kept = 0;
  for (auto& e : cohort.events) {
    if (remap[e.admission] == kDropped) continue;
    e.admission = remap[e.admission];
    cohort.events[kept++] = e;
  }
  cohort.events.resize(kept);
  cohort.events.shrink_to_fit();
  out.events = std::move(cohort.events);
  out.recount_signs();
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& config, Cohort cohort,
                            const RunOptions& options) {
  config.validate();
  const int workers = options.workers;
  PipelineResult result;
  StageClock clock(result.timings);

  if (config.sample_limit) {
    cohort = sample_admissions(std::move(cohort), *config.sample_limit,
                               derive_seed(config.seed, kSampleStream));
  }
  result.frequent_signs = quality::top_signs_by_count(cohort, config.k_freq);
  result.frequent_coverage =
      quality::record_coverage(cohort, result.frequent_signs);
  SeriesSet series = resample::build_series_set(cohort, result.frequent_signs,
                                                config.hours, workers);
  const auto labels = quality::labels_for(series, cohort);
  cohort.events.clear();
  cohort.events.shrink_to_fit();
  clock.lap("resample");

  result.quality = quality::measure(series, labels, workers);
  clock.lap("measure");
  result.selection = quality::select_signs(result.quality, cohort,
                                           config.k_freq, config.k_corr);
  if (result.selection.signs.empty()) {
    throw DataError("no sign has a defined correlation with the label");
  }
  SeriesSet selected = select_columns(std::move(series), result.selection.signs);
  clock.lap("select");

  const auto split = split_indices(labels, config.test_fraction,
                                   derive_seed(config.seed, kSplitStream),
                                   config.stratify);
  for (auto i : split.test) result.test_ids.push_back(selected.admission_ids[i]);
  const std::uint64_t hash = split_hash(result.test_ids);
  auto& test_labels = result.test_labels;
  for (auto i : split.test) test_labels.push_back(labels[i]);
  const std::uint64_t clf_seed = derive_seed(config.seed, kClassifierStream);

  auto report = [&](std::string interpolation, std::string classifier,
                    std::span<const double> scores) {
    EvalReport r;
    r.interpolation = std::move(interpolation);
    r.classifier = std::move(classifier);
    r.metrics = compute_metrics(scores, test_labels);
    r.n_train = split.train.size();
    r.n_test = split.test.size();
    r.seed = config.seed;
    r.split_hash = hash;
    r.config = config;
    return r;
  };

  {
    auto filled = interp::baseline_interpolate_set(selected, workers);
    clock.lap("baseline_interpolate");
    const auto train = assemble_dataset(filled, labels, split.train);
    const auto test = assemble_dataset(filled, labels, split.test);
    filled = {};
    const auto scored =
        train_and_score(train, test, config.classifier, clf_seed, workers);
    result.baseline = report("baseline", "random_forest", scored.scores);
    clock.lap("baseline_classify");
  }

  interp::InterpOptions iopt;
  iopt.window = config.window;
  iopt.variation = config.variation;
  iopt.forest = config.interpolator;
  iopt.max_train = config.interp_max_train;
  auto interpolators = interp::train_interpolators(
      selected, iopt, derive_seed(config.seed, kInterpStream), workers);
  clock.lap("rf_interpolator_train");
  auto filled = interp::rf_interpolate_set(selected, interpolators, workers);
  selected = SeriesSet{};
  clock.lap("rf_interpolate");
  const auto train = assemble_dataset(filled, labels, split.train);
  const auto test = assemble_dataset(filled, labels, split.test);
  filled = {};
  clock.lap("rf_assemble");
  auto scored =
      train_and_score(train, test, config.classifier, clf_seed, workers);
  result.classifier_seconds = clock.lap("rf_classify");
  result.rf = report("rf", "random_forest", scored.scores);
  result.rf_scores = std::move(scored.scores);

  if (options.compare_classifiers) {
    KnnClassifier knn;
    knn.fit(train);
    result.extra.push_back(report("rf", "knn", knn.score(test)));
    LogisticClassifier logistic;
    logistic.fit(train);
    result.extra.push_back(report("rf", "logistic", logistic.score(test)));
    clock.lap("compare_classifiers");
  }

  result.pipeline.hours = config.hours;
  result.pipeline.signs = result.selection.signs;
  result.pipeline.interpolators = std::move(interpolators);
  result.pipeline.classifier = std::move(scored.model);
  return result;
}

std::vector<double> score_admissions(const TrainedPipeline& pipeline,
                                     const Cohort& cohort, int workers) {
  const Cohort full = with_signs(cohort, pipeline.signs);
  const auto set = resample::build_series_set(full, pipeline.signs,
                                              pipeline.hours, workers);
  const auto filled =
      interp::rf_interpolate_set(set, pipeline.interpolators, workers);
  std::vector<std::size_t> rows(set.n_admissions());
  std::iota(rows.begin(), rows.end(), 0);
  const std::vector<int> no_labels(set.n_admissions(), 0);
  const auto data = assemble_dataset(filled, no_labels, rows);
  if (data.n_features() != pipeline.classifier.n_features()) {
    throw DataError("pipeline classifier expects " +
                    std::to_string(pipeline.classifier.n_features()) +
                    " features, cohort yields " +
                    std::to_string(data.n_features()));
  }
  std::vector<double> scores(data.n_rows());
  parallel_for(data.n_rows(), workers, [&](std::size_t r) {
    std::vector<double> x(data.n_features());
    for (std::size_t f = 0; f < x.size(); ++f) x[f] = data.at(r, f);
    scores[r] = pipeline.classifier.predict(x);
  });
  return scores;
}

void write_eval_csv(std::span<const EvalReport> reports,
                    const std::filesystem::path& path) {
  auto out = ingest::open_output(path);
  out << "interpolation,classifier,accuracy,f1,auc_roc,auc_pr,tp,fp,tn,fn,"
         "n_train,n_test,seed,split_hash\n";
  for (const auto& r : reports) {
    const auto& m = r.metrics;
    out << r.interpolation << ',' << r.classifier << ','
        << ingest::format_double(m.accuracy) << ','
        << ingest::format_double(m.f1) << ',' << optional_cell(m.auc_roc)
        << ',' << optional_cell(m.auc_pr) << ',' << m.confusion.tp << ','
        << m.confusion.fp << ',' << m.confusion.tn << ',' << m.confusion.fn
        << ',' << r.n_train << ',' << r.n_test << ',' << r.seed << ','
        << hex64(r.split_hash) << '\n';
  }
  if (!out) throw UsageError("write failed: " + path.string());
}

void write_summary(const PipelineResult& result,
                   const std::filesystem::path& path) {
  auto out = ingest::open_output(path);
  auto metric = [](const std::optional<double>& v) {
    return v ? ingest::format_double(*v) : std::string("undefined");
  };
  out << "medlens run summary\n\n";
  out << "frequent signs: " << result.frequent_signs.size()
      << " covering " << ingest::format_double(result.frequent_coverage)
      << " of records\n";
  out << "selected signs (" << result.selection.signs.size() << "):";
  for (const auto& s : result.selection.signs) out << ' ' << s;
  out << '\n';
  for (const auto& f : result.selection.findings) out << "note: " << f << '\n';
  out << "split: " << result.rf.n_train << " train / " << result.rf.n_test
      << " test, hash " << hex64(result.rf.split_hash) << "\n\n";
  std::vector<const EvalReport*> rows{&result.baseline, &result.rf};
  for (const auto& e : result.extra) rows.push_back(&e);
  for (const auto* r : rows) {
    out << r->interpolation << " + " << r->classifier << ":\n"
        << "  accuracy " << ingest::format_double(r->metrics.accuracy) << '\n'
        << "  f1       " << ingest::format_double(r->metrics.f1) << '\n'
        << "  auc_roc  " << metric(r->metrics.auc_roc) << '\n'
        << "  auc_pr   " << metric(r->metrics.auc_pr) << '\n';
  }
  if (!out) throw UsageError("write failed: " + path.string());
}

}  // namespace medlens::eval
