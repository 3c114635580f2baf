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

// Missing-slot interpolation for hourly series.
//
// The regression interpolator describes a slot by pooled statistics of the
// observed values around it (mean, max, min, variation, population standard
// deviation over [t - W, t + W] without t) plus the slot index t, and learns
// one random-forest regressor per sign from all observed slots of that sign
// across admissions. Features only ever read originally observed values, so
// filling is independent of slot order. Slots whose window holds no
// observation fall through to forward fill, backward fill, then zero; that
// chain on its own is the baseline interpolator.

#ifndef MEDLENS_INTERPOLATE_H_
#define MEDLENS_INTERPOLATE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medlens/forest.h"
#include "medlens/model.h"

namespace medlens::interp {

enum class Provenance : std::uint8_t {
  kObserved,
  kRegressor,
  kForwardFill,
  kBackwardFill,
  kZero,
};

// One-letter codes used in provenance files: o r f b z.
char provenance_code(Provenance p);

inline constexpr std::size_t kFeatureCount = 6;

struct InterpFeature {
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  // max - min, or the population variance when configured so.
  double variation = 0.0;
  double std = 0.0;
  double hour_index = 0.0;

  std::array<double, kFeatureCount> values() const {
    return {mean, max, min, variation, std, hour_index};
  }
};

// Pooled statistics of the observed slots in [t - W, t + W] ∩ [0, H - 1]
// excluding t, or nullopt when none is observed. Precondition t < H.
std::optional<InterpFeature> make_feature(
    const SignSeries& series, std::size_t t, std::size_t window,
    VariationStat variation = VariationStat::kRange);

struct InterpolatedSeries {
  SignSeries series;
  std::vector<Provenance> provenance;
};

struct InterpOptions {
  std::size_t window = 6;
  VariationStat variation = VariationStat::kRange;
  ForestParams forest{20, 12, 5, MtryRule::kThird, true};
  // Training instances kept per sign (uniform subsample); 0 keeps all.
  std::size_t max_train = 0;
};

// Training set of one sign: one row per observed slot with a defined
// feature, target = the observed value. Subsampled to max_train rows with a
// generator derived from `seed`.
forest::Dataset interpolation_training_set(
    std::span<const SignSeries* const> series, const InterpOptions& options,
    std::uint64_t seed);

// Fits the regression forest of one sign. Throws DataError when no usable
// training instance exists.
forest::ForestModel train_interpolator(
    std::span<const SignSeries* const> series, const InterpOptions& options,
    std::uint64_t seed, int workers = 1);

// Regressor fill for slots with a defined feature, then the fallback chain.
// Observed slots are copied bit for bit.
InterpolatedSeries interpolate_series(const SignSeries& series,
                                      const forest::ForestModel& model,
                                      const InterpOptions& options);

// Forward fill, backward fill, zero.
InterpolatedSeries baseline_interpolate(const SignSeries& series);

// Every missing slot set to 0.
InterpolatedSeries zero_fill(const SignSeries& series);

struct RmseResult {
  // nullopt when there was no filled slot to score.
  std::optional<double> rmse;
  std::size_t n_slots = 0;
};

// Streaming RMSE over slots whose provenance is not kObserved.
class RmseAccumulator {
 public:
  // Throws UsageError on a length mismatch between filled and truth.
  void add(const InterpolatedSeries& filled, std::span<const double> truth);
  void merge(const RmseAccumulator& other);
  RmseResult result() const;

 private:
  double sum_sq_ = 0.0;
  std::size_t n_ = 0;
};

// truth[i] is the complete series matching filled[i].
RmseResult interpolation_rmse(std::span<const InterpolatedSeries> filled,
                              std::span<const SignSeries> truth);

// Whole-set variants, laid out like SeriesSet.
struct InterpolatedSet {
  std::size_t hours = 0;
  std::vector<std::string> admission_ids;
  std::vector<std::string> sign_ids;
  std::vector<InterpolatedSeries> series;

  const InterpolatedSeries& at(std::size_t admission, std::size_t sign) const {
    return series[admission * sign_ids.size() + sign];
  }
};

struct SignInterpolators {
  std::vector<std::string> sign_ids;
  std::vector<forest::ForestModel> models;
  InterpOptions options;
};

// One regressor per sign column; column c uses seed derive_seed(seed, c).
SignInterpolators train_interpolators(const SeriesSet& set,
                                      const InterpOptions& options,
                                      std::uint64_t seed, int workers = 1);

// Fills every series of `set` with the regressor of its sign (matched by
// sign id). Throws UsageError if a sign has no regressor.
InterpolatedSet rf_interpolate_set(const SeriesSet& set,
                                   const SignInterpolators& models,
                                   int workers = 1);
InterpolatedSet baseline_interpolate_set(const SeriesSet& set, int workers = 1);

}  // namespace medlens::interp

#endif  // MEDLENS_INTERPOLATE_H_
