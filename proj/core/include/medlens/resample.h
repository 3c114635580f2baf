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

#ifndef MEDLENS_RESAMPLE_H_
#define MEDLENS_RESAMPLE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "medlens/model.h"

namespace medlens::resample {

// Per-slot contribution counts of one hourly_grid call.
struct GridStats {
  std::vector<std::uint32_t> slot_events;
  std::size_t ignored = 0;
};

// Averages the events of one (admission, sign) pair into H hourly slots.
// The grid ends at the discharge time rounded up to the hour; an event at
// time c falls in the slot whose right endpoint is c rounded up to the hour.
// Events outside (grid_end - H h, grid_end] are ignored. Throws UsageError
// if hours < 1.
SignSeries hourly_grid(std::span<const SignEvent> events,
                       Timestamp discharge_time, std::size_t hours,
                       std::string admission_id, std::string sign_id,
                       GridStats* stats = nullptr);

// Index of the slot an event at `charttime` belongs to, or -1 when it lies
// outside the window.
std::int64_t slot_of(Timestamp charttime, Timestamp grid_end,
                     std::size_t hours);

// One series per (admission, sign) pair, admission-major, in cohort
// admission order and the given sign order. Pairs without events yield
// all-missing series. Throws UsageError on an empty sign list or a sign
// absent from the catalog.
SeriesSet build_series_set(const Cohort& cohort,
                           const std::vector<std::string>& signs,
                           std::size_t hours, int workers = 1);

}  // namespace medlens::resample

#endif  // MEDLENS_RESAMPLE_H_
