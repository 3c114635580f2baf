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

// Admission vectors, the train/test split, and the end-to-end pipeline.
//
// run_pipeline resamples the cohort onto hourly grids, measures quality,
// selects signs, then evaluates the same classifier twice on one shared
// split: once on baseline-filled series and once on regressor-filled
// series. Random streams are derived from PipelineConfig::seed only.

#ifndef MEDLENS_EVALUATE_H_
#define MEDLENS_EVALUATE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "medlens/forest.h"
#include "medlens/interpolate.h"
#include "medlens/metrics.h"
#include "medlens/model.h"
#include "medlens/quality.h"

namespace medlens::eval {

// Streams derived from PipelineConfig::seed.
inline constexpr std::uint64_t kSampleStream = 0x5A3B1E0000000001ULL;
inline constexpr std::uint64_t kSplitStream = 0x5B117E0000000002ULL;
inline constexpr std::uint64_t kInterpStream = 0x1A7E4B0000000003ULL;
inline constexpr std::uint64_t kClassifierStream = 0xC1A5500000000004ULL;

struct AdmissionVector {
  std::string admission_id;
  // Sign-major: feature s * H + t is slot t of the s-th sign.
  std::vector<double> features;
  int label = 0;
};

// One vector per admission of `filled`, in its admission order, with the
// signs laid out in `sign_order`. Throws UsageError on an empty sign order
// or a sign missing from the set, DataError on a missing slot or a
// non-finite value.
std::vector<AdmissionVector> assemble_vectors(
    const interp::InterpolatedSet& filled, std::span<const int> labels,
    std::span<const std::string> sign_order);

// Same layout written straight into a dataset holding the given rows.
forest::Dataset assemble_dataset(const interp::InterpolatedSet& filled,
                                 std::span<const int> labels,
                                 std::span<const std::size_t> rows);

forest::Dataset to_dataset(std::span<const AdmissionVector> vectors);

struct SplitIndices {
  // Both ascending.
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Plain: n_test = round(n * f) of a seeded shuffle. Stratified: the same per
// class. Throws DataError when either side would be empty or, stratified,
// when a class has fewer than two members.
SplitIndices split_indices(std::span<const int> labels, double test_fraction,
                           std::uint64_t seed, bool stratify);

std::pair<std::vector<AdmissionVector>, std::vector<AdmissionVector>> split(
    std::span<const AdmissionVector> vectors, double test_fraction,
    std::uint64_t seed, bool stratify);

// FNV-1a 64 over the test admission ids, each followed by '\n'.
std::uint64_t split_hash(std::span<const std::string> test_ids);

struct Scored {
  forest::ForestModel model;
  std::vector<double> scores;
};

// Classification forest on `train`, class-1 vote shares for `test`.
Scored train_and_score(const forest::Dataset& train,
                       const forest::Dataset& test, const ForestParams& params,
                       std::uint64_t seed, int workers = 1);

struct EvalReport {
  std::string interpolation;  // "baseline" or "rf"
  std::string classifier;
  Metrics metrics;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  std::uint64_t split_hash = 0;
  PipelineConfig config;
};

struct TrainedPipeline {
  std::size_t hours = 0;
  std::vector<std::string> signs;
  interp::SignInterpolators interpolators;
  forest::ForestModel classifier;
  double threshold = 0.5;
};

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct RunOptions {
  int workers = 1;
  // Adds KNN and logistic rows on the regressor-filled vectors.
  bool compare_classifiers = false;
};

struct PipelineResult {
  TrainedPipeline pipeline;
  EvalReport baseline;
  EvalReport rf;
  std::vector<EvalReport> extra;
  quality::QualityReport quality;
  quality::Selection selection;
  std::vector<std::string> frequent_signs;
  double frequent_coverage = 0.0;
  std::vector<std::string> test_ids;
  std::vector<int> test_labels;
  std::vector<double> rf_scores;
  std::vector<StageTime> timings;
  // Classifier fit time of the regressor-filled path.
  double classifier_seconds = 0.0;
};

// Keeps `limit` admissions drawn uniformly without replacement (original
// order preserved); a no-op when the cohort is not larger.
Cohort sample_admissions(Cohort cohort, std::size_t limit, std::uint64_t seed);

// Consumes the cohort so its raw events can be released early.
PipelineResult run_pipeline(const PipelineConfig& config, Cohort cohort,
                            const RunOptions& options = {});

// Scores every admission of `cohort` with a trained pipeline. Signs the
// cohort never records are treated as fully missing.
std::vector<double> score_admissions(const TrainedPipeline& pipeline,
                                     const Cohort& cohort, int workers = 1);

// Directory layout: pipeline.txt (hours, threshold, interpolation options,
// sign list), interp_<k>.forest per sign, classifier.forest.
void save_pipeline(const TrainedPipeline& pipeline,
                   const std::filesystem::path& dir);
TrainedPipeline load_pipeline(const std::filesystem::path& dir);

void write_eval_csv(std::span<const EvalReport> reports,
                    const std::filesystem::path& path);
void write_summary(const PipelineResult& result,
                   const std::filesystem::path& path);

}  // namespace medlens::eval

#endif  // MEDLENS_EVALUATE_H_
