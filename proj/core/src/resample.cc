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

#include "medlens/resample.h"

#include "medlens/error.h"
#include "medlens/parallel.h"

namespace medlens::resample {

std::int64_t slot_of(Timestamp charttime, Timestamp grid_end,
                     std::size_t hours) {
  const Timestamp right = ceil_to_hour(charttime);
  if (right > grid_end) return -1;
  const std::int64_t back = (grid_end.minutes - right.minutes) / kMinutesPerHour;
  const auto h = static_cast<std::int64_t>(hours);
  if (back >= h) return -1;
  return h - 1 - back;
}

SignSeries hourly_grid(std::span<const SignEvent> events,
                       Timestamp discharge_time, std::size_t hours,
                       std::string admission_id, std::string sign_id,
                       GridStats* stats) {
  if (hours < 1) throw UsageError("hourly grid needs hours >= 1");
  const Timestamp grid_end = ceil_to_hour(discharge_time);

  std::vector<double> sum(hours, 0.0);
  std::vector<std::uint32_t> count(hours, 0);
  std::size_t ignored = 0;
  for (const auto& e : events) {
    const std::int64_t t = slot_of(e.charttime, grid_end, hours);
    if (t < 0) {
      ++ignored;
      continue;
    }
    sum[static_cast<std::size_t>(t)] += e.value;
    ++count[static_cast<std::size_t>(t)];
  }

  SignSeries series(std::move(admission_id), std::move(sign_id), grid_end,
                    hours);
  for (std::size_t t = 0; t < hours; ++t) {
    if (count[t] > 0) series.set(t, sum[t] / static_cast<double>(count[t]));
  }
  if (stats) {
    stats->slot_events = std::move(count);
    stats->ignored = ignored;
  }
  return series;
}

SeriesSet build_series_set(const Cohort& cohort,
                           const std::vector<std::string>& signs,
                           std::size_t hours, int workers) {
  if (signs.empty()) throw UsageError("build_series_set needs at least one sign");
  if (hours < 1) throw UsageError("hourly grid needs hours >= 1");

  constexpr std::uint32_t kUnused = 0xFFFFFFFFu;
  std::vector<std::uint32_t> column_of(cohort.signs.size(), kUnused);
  for (std::size_t c = 0; c < signs.size(); ++c) {
    const auto idx = cohort.find_sign(signs[c]);
    if (!idx) throw UsageError("sign '" + signs[c] + "' not in cohort catalog");
    column_of[*idx] = static_cast<std::uint32_t>(c);
  }

  // Bucket relevant events by admission, keeping their original order.
  const std::size_t n_adm = cohort.admissions.size();
  std::vector<std::size_t> offset(n_adm + 1, 0);
  for (const auto& e : cohort.events) {
    if (e.sign < column_of.size() && column_of[e.sign] != kUnused) {
      ++offset[e.admission + 1];
    }
  }
  for (std::size_t a = 0; a < n_adm; ++a) offset[a + 1] += offset[a];
  std::vector<std::uint32_t> bucket(offset[n_adm]);
  {
    std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
    for (std::size_t i = 0; i < cohort.events.size(); ++i) {
      const auto& e = cohort.events[i];
      if (e.sign < column_of.size() && column_of[e.sign] != kUnused) {
        bucket[cursor[e.admission]++] = static_cast<std::uint32_t>(i);
      }
    }
  }

  SeriesSet set;
  set.hours = hours;
  set.sign_ids = signs;
  set.admission_ids.reserve(n_adm);
  for (const auto& a : cohort.admissions) set.admission_ids.push_back(a.admission_id);
  set.series.resize(n_adm * signs.size());

  parallel_for(n_adm, workers, [&](std::size_t a) {
    const auto& adm = cohort.admissions[a];
    std::vector<std::vector<SignEvent>> per_sign(signs.size());
    for (std::size_t k = offset[a]; k < offset[a + 1]; ++k) {
      const SignEvent& e = cohort.events[bucket[k]];
      per_sign[column_of[e.sign]].push_back(e);
    }
    for (std::size_t c = 0; c < signs.size(); ++c) {
      set.at(a, c) = hourly_grid(per_sign[c], adm.discharge_time, hours,
                                 adm.admission_id, signs[c]);
    }
  });
  return set;
}

}  // namespace medlens::resample
