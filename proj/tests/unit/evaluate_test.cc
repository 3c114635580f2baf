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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "medlens/error.h"
#include "medlens/evaluate.h"
#include "medlens/synth.h"
#include "temp_dir.h"

namespace medlens::eval {
namespace {

interp::InterpolatedSet filled_set(std::size_t n_adm,
                                   const std::vector<std::string>& signs,
                                   std::size_t hours) {
  interp::InterpolatedSet set;
  set.hours = hours;
  set.sign_ids = signs;
  for (std::size_t a = 0; a < n_adm; ++a) {
    set.admission_ids.push_back("a" + std::to_string(a));
    for (std::size_t s = 0; s < signs.size(); ++s) {
      SignSeries series(set.admission_ids.back(), signs[s], Timestamp{0}, hours);
      for (std::size_t t = 0; t < hours; ++t) {
        series.set(t, 100.0 * a + 10.0 * s + t);
      }
      set.series.push_back({series, std::vector<interp::Provenance>(hours)});
    }
  }
  return set;
}

TEST(AssembleVectors, SignMajorLayout) {
  const auto set = filled_set(2, {"x", "y"}, 3);
  const std::vector<int> labels{0, 1};
  const std::vector<std::string> order{"x", "y"};
  const auto v = assemble_vectors(set, labels, order);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[1].features, (std::vector<double>{100, 101, 102, 110, 111, 112}));
  EXPECT_EQ(v[1].label, 1);
  EXPECT_EQ(v[1].admission_id, "a1");
}

TEST(AssembleVectors, PermutedSignOrderPermutesFeatures) {
  const auto set = filled_set(3, {"x", "y"}, 2);
  const std::vector<int> labels{0, 1, 0};
  const std::vector<std::string> xy{"x", "y"}, yx{"y", "x"};
  const auto a = assemble_vectors(set, labels, xy);
  const auto b = assemble_vectors(set, labels, yx);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].features[0], b[i].features[2]);
    EXPECT_EQ(a[i].features[3], b[i].features[1]);
  }
}

TEST(AssembleVectors, Errors) {
  auto set = filled_set(1, {"x"}, 2);
  const std::vector<int> labels{0};
  EXPECT_THROW(assemble_vectors(set, labels, std::vector<std::string>{}), UsageError);
  EXPECT_THROW(assemble_vectors(set, labels, std::vector<std::string>{"q"}), UsageError);
  set.series[0].series.clear(1);
  EXPECT_THROW(assemble_vectors(set, labels, std::vector<std::string>{"x"}), DataError);
}

TEST(Split, PlainAndStratifiedCounts) {
  std::vector<int> labels(100, 0);
  for (int i = 0; i < 10; ++i) labels[i * 10] = 1;
  const auto plain = split_indices(labels, 0.2, 3, false);
  EXPECT_EQ(plain.train.size(), 80u);
  EXPECT_EQ(plain.test.size(), 20u);
  const auto strat = split_indices(labels, 0.2, 3, true);
  std::size_t pos = 0;
  for (auto i : strat.test) pos += labels[i];
  EXPECT_EQ(strat.test.size(), 20u);
  EXPECT_EQ(pos, 2u);
  // Disjoint, complete, sorted.
  std::set<std::size_t> all(strat.train.begin(), strat.train.end());
  all.insert(strat.test.begin(), strat.test.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_TRUE(std::is_sorted(strat.test.begin(), strat.test.end()));
}

TEST(Split, SameSeedSameSplit) {
  std::vector<int> labels(50);
  for (int i = 0; i < 50; ++i) labels[i] = i % 3 == 0;
  const auto a = split_indices(labels, 0.3, 9, true);
  const auto b = split_indices(labels, 0.3, 9, true);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.test, split_indices(labels, 0.3, 10, true).test);
}

TEST(Split, StratifiedRatioWithinOnePerClass) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + gen() % 200;
    std::vector<int> labels(n);
    std::size_t pos = 0;
    for (auto& y : labels) pos += (y = gen() % 5 == 0);
    if (pos < 2 || n - pos < 2) continue;
    const double f = 0.1 + 0.05 * static_cast<double>(gen() % 10);
    const auto s = split_indices(labels, f, gen(), true);
    std::size_t test_pos = 0;
    for (auto i : s.test) test_pos += labels[i];
    EXPECT_LE(std::abs(static_cast<double>(test_pos) - f * pos), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(s.test.size() - test_pos) - f * (n - pos)), 1.0);
  }
}

TEST(Split, DegenerateClassesAreErrors) {
  EXPECT_THROW(split_indices(std::vector<int>{0, 0, 0, 1}, 0.5, 1, true), DataError);
  EXPECT_THROW(split_indices(std::vector<int>{0, 1}, 0.01, 1, false), DataError);
}

TEST(SplitHash, DependsOnIdsAndOrder) {
  const std::vector<std::string> a{"1", "2"}, b{"2", "1"}, c{"12"};
  EXPECT_NE(split_hash(a), split_hash(b));
  EXPECT_NE(split_hash(a), split_hash(c));
  EXPECT_EQ(split_hash(a), split_hash(a));
  // FNV-1a 64 of the empty input is the offset basis.
  EXPECT_EQ(split_hash({}), 0xcbf29ce484222325ULL);
}

forest::Dataset rows_dataset(std::size_t n, std::uint64_t seed, bool separable) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0, 1);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (std::size_t i = 0; i < n; ++i) {
    const double label = static_cast<double>(gen() % 2);
    rows.push_back({z(gen) + (separable ? 10 * label : 0), z(gen), z(gen)});
    y.push_back(label);
  }
  return forest::Dataset::from_rows(rows, y);
}

std::vector<int> int_labels(const forest::Dataset& d) {
  std::vector<int> out;
  for (double y : d.targets()) out.push_back(static_cast<int>(y));
  return out;
}

TEST(TrainAndScore, SeparableIsPerfect) {
  const auto train = rows_dataset(300, 1, true), test = rows_dataset(100, 2, true);
  const auto s = train_and_score(train, test, {50, 16, 2, MtryRule::kSqrt, true}, 4);
  EXPECT_EQ(*auc_roc(s.scores, int_labels(test)), 1.0);
}

TEST(TrainAndScore, IndependentLabelsNearChance) {
  const auto train = rows_dataset(2000, 3, false), test = rows_dataset(2000, 4, false);
  const auto s = train_and_score(train, test, {50, 16, 2, MtryRule::kSqrt, true}, 4);
  const double auc = *auc_roc(s.scores, int_labels(test));
  EXPECT_GE(auc, 0.4);
  EXPECT_LE(auc, 0.6);
}

TEST(TrainAndScore, ConstantFeaturesGiveHalf) {
  auto train = rows_dataset(100, 5, false), test = rows_dataset(50, 6, false);
  for (auto* d : {&train, &test}) {
    for (std::size_t r = 0; r < d->n_rows(); ++r) {
      for (std::size_t f = 0; f < d->n_features(); ++f) d->set(r, f, 1.0);
    }
  }
  const auto s = train_and_score(train, test, {}, 1);
  EXPECT_EQ(*auc_roc(s.scores, int_labels(test)), 0.5);
  EXPECT_TRUE(std::all_of(s.scores.begin(), s.scores.end(),
                          [&](double v) { return v == s.scores.front(); }));
}

TEST(TrainAndScore, SingleClassIsAnError) {
  auto train = rows_dataset(20, 7, false);
  for (std::size_t r = 0; r < train.n_rows(); ++r) train.set_target(r, 1.0);
  EXPECT_THROW(train_and_score(train, train, {}, 1), DataError);
}

synth::Generated small_cohort(std::uint64_t seed, std::size_t n = 300) {
  synth::SynthSpec spec;
  spec.n_admissions = n;
  spec.n_signs = 6;
  spec.hours = 24;
  spec.seed = seed;
  spec.keep_truth = false;
  return synth::generate(spec);
}

PipelineConfig small_config(std::uint64_t seed) {
  PipelineConfig c;
  c.hours = 24;
  c.k_freq = 6;
  c.k_corr = 3;
  c.seed = seed;
  c.classifier.n_trees = 25;
  c.interpolator.n_trees = 8;
  return c;
}

TEST(RunPipeline, PairedReportsShareTheSplit) {
  auto g = small_cohort(1);
  const auto r = run_pipeline(small_config(1), std::move(g.cohort));
  EXPECT_EQ(r.baseline.split_hash, r.rf.split_hash);
  EXPECT_EQ(r.baseline.n_test, r.rf.n_test);
  EXPECT_EQ(r.rf.n_test, 60u);
  EXPECT_EQ(r.rf.metrics.confusion.total(), r.rf.n_test);
  EXPECT_EQ(r.selection.signs.size(), 3u);
  EXPECT_EQ(r.pipeline.signs, r.selection.signs);
  EXPECT_EQ(split_hash(r.test_ids), r.rf.split_hash);
  EXPECT_FALSE(r.timings.empty());
}

TEST(RunPipeline, SampleLimitAppliedBeforeSplit) {
  auto g = small_cohort(2, 400);
  auto c = small_config(2);
  c.sample_limit = 150;
  const auto r = run_pipeline(c, std::move(g.cohort));
  EXPECT_EQ(r.rf.n_train + r.rf.n_test, 150u);
}

TEST(RunPipeline, WorkersDoNotChangeResults) {
  auto a = small_cohort(3);
  auto b = small_cohort(3);
  const auto one = run_pipeline(small_config(3), std::move(a.cohort), {1, true});
  const auto four = run_pipeline(small_config(3), std::move(b.cohort), {4, true});
  EXPECT_EQ(one.rf_scores, four.rf_scores);
  EXPECT_EQ(one.pipeline.classifier, four.pipeline.classifier);
  ASSERT_EQ(one.extra.size(), 2u);
  EXPECT_EQ(one.extra[0].metrics.auc_roc, four.extra[0].metrics.auc_roc);
}

TEST(Pipeline, SaveLoadScoresIdentically) {
  auto g = small_cohort(4);
  const Cohort copy = g.cohort;
  const auto r = run_pipeline(small_config(4), std::move(g.cohort));
  testing::TempDir dir;
  save_pipeline(r.pipeline, dir / "model");
  const auto back = load_pipeline(dir / "model");
  EXPECT_EQ(back.signs, r.pipeline.signs);
  EXPECT_EQ(back.classifier, r.pipeline.classifier);
  EXPECT_EQ(back.interpolators.models, r.pipeline.interpolators.models);
  const auto s1 = score_admissions(r.pipeline, copy);
  const auto s2 = score_admissions(back, copy, 3);
  EXPECT_EQ(s1, s2);
  // Test-set scores from the run are reproduced by scoring the same cohort.
  for (std::size_t i = 0; i < r.test_ids.size(); ++i) {
    const auto it = std::find_if(copy.admissions.begin(), copy.admissions.end(),
                                 [&](const auto& a) { return a.admission_id == r.test_ids[i]; });
    const auto idx = static_cast<std::size_t>(it - copy.admissions.begin());
    EXPECT_EQ(s1[idx], r.rf_scores[i]);
  }
}

TEST(Pipeline, LoadRejectsBrokenDirectory) {
  testing::TempDir dir;
  EXPECT_THROW(load_pipeline(dir / "missing"), DataError);
  std::filesystem::create_directories(dir / "m");
  testing::write_file(dir / "m" / "pipeline.txt", "medlens-pipeline 7\n");
  EXPECT_THROW(load_pipeline(dir / "m"), DataError);
}

TEST(Reports, EvalCsvHeaderAndRows) {
  EvalReport r;
  r.interpolation = "rf";
  r.classifier = "random_forest";
  r.metrics.accuracy = 0.5;
  r.metrics.auc_roc = 0.75;
  r.split_hash = 0xabc;
  testing::TempDir dir;
  write_eval_csv(std::vector<EvalReport>{r}, dir / "e.csv");
  EXPECT_EQ(testing::read_file(dir / "e.csv"),
            "interpolation,classifier,accuracy,f1,auc_roc,auc_pr,tp,fp,tn,fn,"
            "n_train,n_test,seed,split_hash\n"
            "rf,random_forest,0.5,0.0,0.75,,0,0,0,0,0,0,0,0000000000000abc\n");
}

}  // namespace
}  // namespace medlens::eval
