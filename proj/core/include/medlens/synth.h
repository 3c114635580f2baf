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

// Synthetic cohorts with known structure.
//
// Each admission carries a latent health trajectory z(t): a Gaussian random
// walk reflected at +-bound and smoothed by a centered moving average.
// Informative signs read offset + scale * (z + noise); uninformative signs
// read the same way from a second, independent walk of their own. The label
// is Bernoulli(logistic(sharpness * z(H - 1) + b)) with b found by bisection
// so the expected prevalence hits the target, then flipped with probability
// label_noise. Observations are the hourly truth thinned per sign (MCAR or
// bursty gaps), each placed at a uniform minute inside its hour.

#ifndef MEDLENS_SYNTH_H_
#define MEDLENS_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "medlens/model.h"

namespace medlens::synth {

enum class Missingness {
  kMcar,
  // Two-state chain per sign whose observed/missing runs are geometric with
  // mean gap_length for the missing state; stationary rate equals rho.
  kBlocky,
};

struct SynthSpec {
  std::size_t n_admissions = 2000;
  std::size_t n_signs = 10;
  std::size_t n_informative = 2;
  std::size_t hours = 48;
  // One rate for every sign, or one per sign.
  std::vector<double> rates{0.5};
  double label_noise = 0.0;
  double prevalence = 0.1;
  double label_sharpness = 3.0;
  // Latent walk: step deviation, reflecting bound, moving-average width.
  double step_sd = 0.15;
  double bound = 3.0;
  std::size_t smoothing = 5;
  // Measurement noise, in latent units.
  double noise_sd = 0.3;
  Missingness missingness = Missingness::kMcar;
  double gap_length = 6.0;
  std::uint64_t seed = 0;
  // Off for large runs that never look at the truth.
  bool keep_truth = true;

  // Throws UsageError naming the first violated constraint.
  void validate() const;
  double rate(std::size_t sign) const {
    return rates.size() == 1 ? rates.front() : rates[sign];
  }
};

struct GroundTruth {
  std::size_t hours = 0;
  std::vector<std::string> admission_ids;
  std::vector<std::string> sign_ids;
  // Dense hourly values, admission-major then sign then hour. Empty when
  // the spec had keep_truth off.
  std::vector<double> values;
  // Sorted ids of the informative signs.
  std::vector<std::string> informative;
  std::vector<int> labels;

  std::span<const double> series(std::size_t admission,
                                 std::size_t sign) const {
    return {values.data() + (admission * sign_ids.size() + sign) * hours,
            hours};
  }
  // Complete SignSeries for one pair; grid_end is left at the epoch.
  SignSeries as_series(std::size_t admission, std::size_t sign) const;
};

struct Generated {
  Cohort cohort;
  GroundTruth truth;
};

Generated generate(const SynthSpec& spec, int workers = 1);

// Zero-padded ids, e.g. "A000042" and "S07".
std::string admission_name(std::size_t index, std::size_t count);
std::string sign_name(std::size_t index, std::size_t count);

// Ground truth as a series matrix plus a one-column informative list.
void write_truth(const GroundTruth& truth, const std::filesystem::path& matrix,
                 const std::filesystem::path& informative);

}  // namespace medlens::synth

#endif  // MEDLENS_SYNTH_H_
