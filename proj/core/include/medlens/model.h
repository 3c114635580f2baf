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

// Core domain types shared by every stage of the pipeline.

#ifndef MEDLENS_MODEL_H_
#define MEDLENS_MODEL_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medlens/timestamp.h"

namespace medlens {

// One raw measurement. Admission and sign are interned: they index into
// Cohort::admissions and Cohort::signs, so equality is still by identifier
// value within a cohort.
struct SignEvent {
  std::uint32_t admission = 0;
  std::uint32_t sign = 0;
  Timestamp charttime;
  double value = 0.0;

  friend bool operator==(const SignEvent&, const SignEvent&) = default;
};

struct AdmissionRecord {
  std::string admission_id;
  Timestamp discharge_time;
  int expire_flag = 0;

  friend bool operator==(const AdmissionRecord&,
                         const AdmissionRecord&) = default;
};

struct SignInfo {
  std::string sign_id;
  std::size_t record_count = 0;

  friend bool operator==(const SignInfo&, const SignInfo&) = default;
};

struct Cohort {
  std::vector<AdmissionRecord> admissions;
  // Sign catalog, sorted by sign_id.
  std::vector<SignInfo> signs;
  std::vector<SignEvent> events;

  std::optional<std::uint32_t> find_sign(std::string_view sign_id) const;
  // Recomputes SignInfo::record_count from `events`.
  void recount_signs();
  std::size_t total_records() const { return events.size(); }

  friend bool operator==(const Cohort&, const Cohort&) = default;
};

// Empty iff every cohort invariant holds. Each finding names the offending
// record.
std::vector<std::string> validate_cohort(const Cohort& cohort);

// Fixed-length hourly grid for one (admission, sign) pair. Slot t covers the
// hour interval (grid_end - (H - t) h, grid_end - (H - 1 - t) h].
class SignSeries {
 public:
  SignSeries() = default;
  // All slots start missing.
  SignSeries(std::string admission_id, std::string sign_id, Timestamp grid_end,
             std::size_t hours);

  const std::string& admission_id() const { return admission_id_; }
  const std::string& sign_id() const { return sign_id_; }
  Timestamp grid_end() const { return grid_end_; }
  std::size_t size() const { return grid_.size(); }

  bool observed(std::size_t t) const { return !std::isnan(grid_[t]); }
  std::optional<double> at(std::size_t t) const {
    if (!observed(t)) return std::nullopt;
    return grid_[t];
  }
  // Precondition: observed(t).
  double value(std::size_t t) const { return grid_[t]; }
  void set(std::size_t t, double v) { grid_[t] = v; }
  void clear(std::size_t t) { grid_[t] = kMissing; }

  // Right endpoint of slot t.
  Timestamp slot_end(std::size_t t) const {
    return grid_end_.plus_hours(-static_cast<std::int64_t>(size() - 1 - t));
  }

  std::size_t observed_count() const;
  bool complete() const { return observed_count() == size(); }

  // NaN marks a missing slot.
  std::span<const double> raw() const { return grid_; }

  friend bool operator==(const SignSeries& a, const SignSeries& b);

 private:
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  std::string admission_id_;
  std::string sign_id_;
  Timestamp grid_end_;
  std::vector<double> grid_;
};

// Series for every (admission, sign) pair, admission-major: the series of
// admission a and sign s lives at index a * sign_ids.size() + s.
struct SeriesSet {
  std::size_t hours = 0;
  std::vector<std::string> admission_ids;
  std::vector<std::string> sign_ids;
  std::vector<SignSeries> series;

  std::size_t n_admissions() const { return admission_ids.size(); }
  std::size_t n_signs() const { return sign_ids.size(); }
  const SignSeries& at(std::size_t admission, std::size_t sign) const {
    return series[admission * sign_ids.size() + sign];
  }
  SignSeries& at(std::size_t admission, std::size_t sign) {
    return series[admission * sign_ids.size() + sign];
  }
  std::optional<std::size_t> sign_column(std::string_view sign_id) const;
};

// Per-node feature subset size.
enum class MtryRule {
  kAuto,   // sqrt for classification, third for regression
  kSqrt,   // ceil(sqrt(p))
  kThird,  // ceil(p / 3)
  kAll,    // p
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 16;
  std::size_t min_leaf = 2;
  MtryRule mtry_rule = MtryRule::kAuto;
  // Off only for oracle comparisons: each tree then sees the sample set as is.
  bool bootstrap = true;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// How the "variation" statistic of an interpolation window is computed.
enum class VariationStat { kRange, kVariance };

struct PipelineConfig {
  std::size_t hours = 720;
  std::size_t window = 6;
  std::size_t k_freq = 77;
  std::size_t k_corr = 20;
  ForestParams classifier{100, 16, 2, MtryRule::kSqrt, true};
  ForestParams interpolator{20, 12, 5, MtryRule::kThird, true};
  // Cap on training instances per sign interpolator; 0 keeps all of them.
  std::size_t interp_max_train = 20000;
  VariationStat variation = VariationStat::kRange;
  std::uint64_t seed = 0;
  double test_fraction = 0.20;
  std::optional<std::size_t> sample_limit = 5000;
  bool stratify = true;

  // Throws UsageError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const PipelineConfig&,
                         const PipelineConfig&) = default;
};

std::string_view to_string(MtryRule rule);
std::string_view to_string(VariationStat stat);
// Throw UsageError on unknown names.
MtryRule parse_mtry_rule(std::string_view name);
VariationStat parse_variation(std::string_view name);

}  // namespace medlens

#endif  // MEDLENS_MODEL_H_
