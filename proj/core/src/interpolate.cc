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

#include "medlens/interpolate.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "medlens/error.h"
#include "medlens/parallel.h"
#include "medlens/random.h"

namespace medlens::interp {
namespace {

constexpr std::uint64_t kSubsampleStream = 0x5AB5A3D1E0000001ULL;

// Fills the still-missing slots of `out` (NaN in `values`) forward, then
// backward, then with zero.
void fallback_fill(std::vector<double>& values,
                   std::vector<Provenance>& provenance) {
  const std::size_t h = values.size();
  bool have = false;
  double last = 0.0;
  for (std::size_t t = 0; t < h; ++t) {
    if (!std::isnan(values[t])) {
      have = true;
      last = values[t];
    } else if (have) {
      values[t] = last;
      provenance[t] = Provenance::kForwardFill;
    }
  }
  // Only a leading run can still be missing.
  std::size_t first = 0;
  while (first < h && std::isnan(values[first])) ++first;
  if (first < h) {
    for (std::size_t t = 0; t < first; ++t) {
      values[t] = values[first];
      provenance[t] = Provenance::kBackwardFill;
    }
  } else {
    for (std::size_t t = 0; t < h; ++t) {
      values[t] = 0.0;
      provenance[t] = Provenance::kZero;
    }
  }
}

InterpolatedSeries assemble(const SignSeries& source,
                            const std::vector<double>& values,
                            std::vector<Provenance> provenance) {
  InterpolatedSeries out{SignSeries(source.admission_id(), source.sign_id(),
                                    source.grid_end(), source.size()),
                         std::move(provenance)};
  for (std::size_t t = 0; t < values.size(); ++t) out.series.set(t, values[t]);
  return out;
}

std::vector<Provenance> initial_provenance(const SignSeries& series) {
  std::vector<Provenance> p(series.size(), Provenance::kZero);
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (series.observed(t)) p[t] = Provenance::kObserved;
  }
  return p;
}

// Regressor fill of several series of one sign. Features of the whole
// block are gathered first so each tree is walked over all of them in turn.
void fill_block(std::span<const SignSeries* const> block,
                const forest::ForestModel& model, const InterpOptions& options,
                std::span<InterpolatedSeries> out) {
  if (model.n_features() != kFeatureCount) {
    throw UsageError("interpolator expects " +
                     std::to_string(model.n_features()) + " features");
  }
  struct Slot {
    std::uint32_t series;
    std::uint32_t t;
  };
  std::vector<Slot> slots;
  std::vector<double> rows;
  for (std::size_t i = 0; i < block.size(); ++i) {
    const SignSeries& s = *block[i];
    const auto raw = s.raw();
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (!std::isnan(raw[t])) continue;
      const auto f = make_feature(s, t, options.window, options.variation);
      if (!f) continue;
      const auto x = f->values();
      slots.push_back({static_cast<std::uint32_t>(i),
                       static_cast<std::uint32_t>(t)});
      rows.insert(rows.end(), x.begin(), x.end());
    }
  }
  std::vector<double> predicted(slots.size());
  model.predict_batch(rows, predicted);

  std::size_t next = 0;
  for (std::size_t i = 0; i < block.size(); ++i) {
    const SignSeries& s = *block[i];
    const auto raw = s.raw();
    std::vector<double> values(raw.begin(), raw.end());
    auto provenance = initial_provenance(s);
    for (; next < slots.size() && slots[next].series == i; ++next) {
      values[slots[next].t] = predicted[next];
      provenance[slots[next].t] = Provenance::kRegressor;
    }
    fallback_fill(values, provenance);
    out[i] = assemble(s, values, std::move(provenance));
  }
}

}  // namespace

char provenance_code(Provenance p) {
  switch (p) {
    case Provenance::kObserved: return 'o';
    case Provenance::kRegressor: return 'r';
    case Provenance::kForwardFill: return 'f';
    case Provenance::kBackwardFill: return 'b';
    case Provenance::kZero: return 'z';
  }
  return '?';
}

std::optional<InterpFeature> make_feature(const SignSeries& series,
                                          std::size_t t, std::size_t window,
                                          VariationStat variation) {
  const std::size_t h = series.size();
  const std::size_t lo = t >= window ? t - window : 0;
  const std::size_t hi = std::min(h - 1, t + window);
  const auto raw = series.raw();

  std::size_t n = 0;
  double sum = 0.0;
  double mx = -std::numeric_limits<double>::infinity();
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t k = lo; k <= hi; ++k) {
    if (k == t || std::isnan(raw[k])) continue;
    ++n;
    sum += raw[k];
    mx = std::max(mx, raw[k]);
    mn = std::min(mn, raw[k]);
  }
  if (n == 0) return std::nullopt;

  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    if (k == t || std::isnan(raw[k])) continue;
    sq += (raw[k] - mean) * (raw[k] - mean);
  }
  const double var = sq / static_cast<double>(n);

  InterpFeature f;
  f.mean = mean;
  f.max = mx;
  f.min = mn;
  f.variation = variation == VariationStat::kRange ? mx - mn : var;
  f.std = std::sqrt(var);
  f.hour_index = static_cast<double>(t);
  return f;
}

forest::Dataset interpolation_training_set(
    std::span<const SignSeries* const> series, const InterpOptions& options,
    std::uint64_t seed) {
  // Positions first; features are computed only for the kept ones.
  struct Position {
    std::uint32_t series;
    std::uint32_t slot;
  };
  std::vector<Position> positions;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const SignSeries& s = *series[i];
    const auto raw = s.raw();
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (std::isnan(raw[t])) continue;
      // Legal iff some other slot in the window is observed.
      const std::size_t lo = t >= options.window ? t - options.window : 0;
      const std::size_t hi = std::min(s.size() - 1, t + options.window);
      bool legal = false;
      for (std::size_t k = lo; k <= hi && !legal; ++k) {
        legal = k != t && !std::isnan(raw[k]);
      }
      if (legal) {
        positions.push_back({static_cast<std::uint32_t>(i),
                             static_cast<std::uint32_t>(t)});
      }
    }
  }

  if (options.max_train > 0 && positions.size() > options.max_train) {
    Rng rng(derive_seed(seed, kSubsampleStream));
    for (std::size_t k = 0; k < options.max_train; ++k) {
      const std::size_t j =
          k + static_cast<std::size_t>(rng.index(positions.size() - k));
      std::swap(positions[k], positions[j]);
    }
    positions.resize(options.max_train);
    std::sort(positions.begin(), positions.end(),
              [](const Position& a, const Position& b) {
                return a.series != b.series ? a.series < b.series
                                            : a.slot < b.slot;
              });
  }

  forest::Dataset data(positions.size(), kFeatureCount);
  for (std::size_t r = 0; r < positions.size(); ++r) {
    const SignSeries& s = *series[positions[r].series];
    const auto f =
        make_feature(s, positions[r].slot, options.window, options.variation);
    const auto v = f->values();
    for (std::size_t c = 0; c < kFeatureCount; ++c) data.set(r, c, v[c]);
    data.set_target(r, s.value(positions[r].slot));
  }
  return data;
}

forest::ForestModel train_interpolator(
    std::span<const SignSeries* const> series, const InterpOptions& options,
    std::uint64_t seed, int workers) {
  if (options.window < 1) throw UsageError("interpolation window must be >= 1");
  const auto data = interpolation_training_set(series, options, seed);
  if (data.n_rows() == 0) {
    throw DataError("no usable interpolation training instance" +
                    (series.empty() ? std::string()
                                    : " for sign '" + series.front()->sign_id() +
                                          "'"));
  }
  return forest::fit_forest(data, options.forest, forest::Task::kRegression,
                            seed, workers);
}

InterpolatedSeries interpolate_series(const SignSeries& series,
                                      const forest::ForestModel& model,
                                      const InterpOptions& options) {
  const SignSeries* one[] = {&series};
  std::vector<InterpolatedSeries> out(1);
  fill_block(one, model, options, out);
  return std::move(out.front());
}

InterpolatedSeries baseline_interpolate(const SignSeries& series) {
  const auto raw = series.raw();
  std::vector<double> values(raw.begin(), raw.end());
  auto provenance = initial_provenance(series);
  fallback_fill(values, provenance);
  return assemble(series, values, std::move(provenance));
}

InterpolatedSeries zero_fill(const SignSeries& series) {
  const auto raw = series.raw();
  std::vector<double> values(raw.begin(), raw.end());
  auto provenance = initial_provenance(series);
  for (auto& v : values) {
    if (std::isnan(v)) v = 0.0;
  }
  return assemble(series, values, std::move(provenance));
}

void RmseAccumulator::add(const InterpolatedSeries& filled,
                          std::span<const double> truth) {
  if (truth.size() != filled.series.size()) {
    throw UsageError("truth and filled series differ in length");
  }
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (filled.provenance[t] == Provenance::kObserved) continue;
    const double d = filled.series.value(t) - truth[t];
    sum_sq_ += d * d;
    ++n_;
  }
}

void RmseAccumulator::merge(const RmseAccumulator& other) {
  sum_sq_ += other.sum_sq_;
  n_ += other.n_;
}

RmseResult RmseAccumulator::result() const {
  if (n_ == 0) return {std::nullopt, 0};
  return {std::sqrt(sum_sq_ / static_cast<double>(n_)), n_};
}

RmseResult interpolation_rmse(std::span<const InterpolatedSeries> filled,
                              std::span<const SignSeries> truth) {
  if (filled.size() != truth.size()) {
    throw UsageError("truth must cover every filled series");
  }
  RmseAccumulator acc;
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!truth[i].complete()) {
      throw UsageError("truth series for '" + truth[i].admission_id() + "/" +
                       truth[i].sign_id() + "' has missing slots");
    }
    acc.add(filled[i], truth[i].raw());
  }
  return acc.result();
}

SignInterpolators train_interpolators(const SeriesSet& set,
                                      const InterpOptions& options,
                                      std::uint64_t seed, int workers) {
  SignInterpolators out;
  out.sign_ids = set.sign_ids;
  out.options = options;
  out.models.resize(set.n_signs());
  parallel_for(set.n_signs(), workers, [&](std::size_t c) {
    std::vector<const SignSeries*> column;
    column.reserve(set.n_admissions());
    for (std::size_t a = 0; a < set.n_admissions(); ++a) {
      column.push_back(&set.at(a, c));
    }
    out.models[c] = train_interpolator(column, options, derive_seed(seed, c));
  });
  return out;
}

InterpolatedSet rf_interpolate_set(const SeriesSet& set,
                                   const SignInterpolators& models,
                                   int workers) {
  std::vector<const forest::ForestModel*> by_column(set.n_signs(), nullptr);
  for (std::size_t c = 0; c < set.n_signs(); ++c) {
    for (std::size_t m = 0; m < models.sign_ids.size(); ++m) {
      if (models.sign_ids[m] == set.sign_ids[c]) by_column[c] = &models.models[m];
    }
    if (!by_column[c]) {
      throw UsageError("no interpolator for sign '" + set.sign_ids[c] + "'");
    }
  }
  InterpolatedSet out{set.hours, set.admission_ids, set.sign_ids, {}};
  out.series.resize(set.series.size());
  // Sign-major blocks so consecutive work shares one forest.
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks_per_sign = (set.n_admissions() + kBlock - 1) / kBlock;
  parallel_for(set.n_signs() * blocks_per_sign, workers, [&](std::size_t job) {
    const std::size_t c = job / blocks_per_sign;
    const std::size_t first = (job % blocks_per_sign) * kBlock;
    const std::size_t last = std::min(set.n_admissions(), first + kBlock);
    std::vector<const SignSeries*> block;
    for (std::size_t a = first; a < last; ++a) block.push_back(&set.at(a, c));
    std::vector<InterpolatedSeries> filled(block.size());
    fill_block(block, *by_column[c], models.options, filled);
    for (std::size_t a = first; a < last; ++a) {
      out.series[a * set.n_signs() + c] = std::move(filled[a - first]);
    }
  });
  return out;
}

InterpolatedSet baseline_interpolate_set(const SeriesSet& set, int workers) {
  InterpolatedSet out{set.hours, set.admission_ids, set.sign_ids, {}};
  out.series.resize(set.series.size());
  parallel_for(set.series.size(), workers, [&](std::size_t i) {
    out.series[i] = baseline_interpolate(set.series[i]);
  });
  return out;
}

}  // namespace medlens::interp
