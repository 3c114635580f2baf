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

// Data-quality measurement: the four missing-rate views of an hourly series
// set, per-sign correlation with the mortality label, and the two-step sign
// selector built on top of them.

#ifndef MEDLENS_QUALITY_H_
#define MEDLENS_QUALITY_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medlens/model.h"

namespace medlens::quality {

struct SignRate {
  std::string sign_id;
  double missing_rate = 0.0;
};

struct AdmissionRate {
  std::string admission_id;
  double missing_rate = 0.0;
};

struct PearsonScore {
  std::string sign_id;
  // nullopt when fewer than two pairs exist or either side has zero variance.
  std::optional<double> r;
  std::size_t n_pairs = 0;
};

struct QualityReport {
  // (a) share of admissions with no observed slot of the sign.
  std::vector<SignRate> metric_a;
  // (b) share of all admission-hours without an observation of the sign.
  std::vector<SignRate> metric_b;
  // (c) share of the K signs an admission never has.
  std::vector<AdmissionRate> metric_c;
  // (d) share of the K*H sign-hours an admission has no observation for.
  std::vector<AdmissionRate> metric_d;
  std::vector<PearsonScore> pearson;
  std::size_t n_signs_considered = 0;
  std::size_t hours = 0;
};

// Fills metric_a..metric_d. Throws DataError on an empty series set.
QualityReport missing_metrics(const SeriesSet& series);

// Pearson coefficient by the two-pass formula. nullopt if the spans hold
// fewer than two pairs or either has zero variance.
std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y);

// Correlation of a sign with the label: one pair per admission holding at
// least one observed slot, x = mean of its observed slot values,
// y = expire_flag. `labels` is aligned with series.admission_ids.
PearsonScore pearson_sign_label(const SeriesSet& series,
                                std::span<const int> labels,
                                std::size_t sign_column);
// Same, looking labels up in the cohort by admission id.
PearsonScore pearson_sign_label(const SeriesSet& series, const Cohort& cohort,
                                std::string_view sign_id);

// Labels of series.admission_ids looked up in the cohort. Throws DataError
// if an admission is unknown.
std::vector<int> labels_for(const SeriesSet& series, const Cohort& cohort);

// Missing-rate metrics plus Pearson scores for every sign of the set.
QualityReport measure(const SeriesSet& series, std::span<const int> labels,
                      int workers = 1);

// Step one of the selector: the k signs with the most raw records, ties by
// sign_id. Throws UsageError if k exceeds the catalog.
std::vector<std::string> top_signs_by_count(const Cohort& cohort,
                                            std::size_t k);

// Fraction of all raw records that belong to `signs`.
double record_coverage(const Cohort& cohort,
                       std::span<const std::string> signs);

struct Selection {
  // Sorted by |r| descending, ties by sign_id.
  std::vector<std::string> signs;
  std::vector<std::string> findings;
};

// Two-step selection: keep the k_freq most recorded signs, then the k_corr
// of those with the largest |r|. Signs with undefined r are never selected;
// if fewer than k_corr have a defined r, all of them are returned with a
// finding. Throws UsageError unless k_corr <= k_freq <= catalog size.
Selection select_signs(const QualityReport& report, const Cohort& cohort,
                       std::size_t k_freq, std::size_t k_corr);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

struct Histogram {
  std::vector<HistogramBin> bins;
  std::size_t undefined = 0;
};

// Counts of defined r per [lo, hi) bin tiling [-1, 1]; r = 1 falls in the
// last bin. Throws UsageError if bin_width <= 0.
Histogram correlation_histogram(const QualityReport& report,
                                double bin_width);

}  // namespace medlens::quality

#endif  // MEDLENS_QUALITY_H_
