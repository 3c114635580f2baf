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

#include "medlens/synth.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "medlens/error.h"
#include "medlens/ingest.h"
#include "medlens/parallel.h"
#include "medlens/random.h"

namespace medlens::synth {
namespace {

constexpr std::uint64_t kSignStream = 0x5167AA0000000001ULL;
constexpr std::uint64_t kLabelStream = 0x1ABE100000000002ULL;
constexpr std::size_t kChunk = 256;
// Discharges fall within one year from 2150-01-01.
constexpr std::int64_t kBaseMinutes =
    std::chrono::duration_cast<std::chrono::minutes>(
        std::chrono::sys_days{std::chrono::year{2150} / 1 / 1}
            .time_since_epoch())
        .count();
constexpr std::int64_t kYearMinutes = 365LL * 24 * 60;

struct SignShape {
  bool informative = false;
  double offset = 0.0;
  double scale = 0.0;
};

std::string padded(char prefix, std::size_t value, std::size_t width) {
  std::string digits = std::to_string(value);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::size_t digit_count(std::size_t n) {
  std::size_t d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void latent_walk(const SynthSpec& spec, Rng& rng, std::vector<double>& raw,
                 std::vector<double>& out) {
  const std::size_t h = spec.hours;
  raw.resize(h);
  double z = rng.normal();
  for (std::size_t t = 0; t < h; ++t) {
    if (t > 0) z += spec.step_sd * rng.normal();
    // Reflect until inside; a single step can overshoot by more than 2b only
    // for absurd step sizes, which validate() rules out.
    while (z > spec.bound || z < -spec.bound) {
      z = z > spec.bound ? 2.0 * spec.bound - z : -2.0 * spec.bound - z;
    }
    raw[t] = z;
  }
  out.assign(h, 0.0);
  const std::size_t half = spec.smoothing / 2;
  for (std::size_t t = 0; t < h; ++t) {
    const std::size_t lo = t >= half ? t - half : 0;
    const std::size_t hi = std::min(h - 1, t + half);
    double sum = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) sum += raw[k];
    out[t] = sum / static_cast<double>(hi - lo + 1);
  }
}

void observation_mask(const SynthSpec& spec, double rho, Rng& rng,
                      std::vector<char>& keep) {
  const std::size_t h = spec.hours;
  keep.assign(h, 0);
  if (rho >= 1.0) {
    std::fill(keep.begin(), keep.end(), 1);
    return;
  }
  if (spec.missingness == Missingness::kMcar) {
    for (std::size_t t = 0; t < h; ++t) keep[t] = rng.bernoulli(rho) ? 1 : 0;
    return;
  }
  // Missing runs end with probability q; observed runs end with p chosen so
  // that the stationary observed share is rho.
  const double q = 1.0 / spec.gap_length;
  const double p = std::min(1.0, q * (1.0 - rho) / rho);
  bool observed = rng.bernoulli(rho);
  for (std::size_t t = 0; t < h; ++t) {
    keep[t] = observed ? 1 : 0;
    observed = observed ? !rng.bernoulli(p) : rng.bernoulli(q);
  }
}

// Offset b with mean(logistic(a * z + b)) = target.
double solve_offset(std::span<const double> endpoints, double sharpness,
                    double target) {
  double lo = -60.0;
  double hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (double z : endpoints) mean += logistic(sharpness * z + mid);
    mean /= static_cast<double>(endpoints.size());
    (mean < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct AdmissionOutput {
  std::vector<SignEvent> events;
  Timestamp discharge;
  double endpoint = 0.0;
};

}  // namespace

void SynthSpec::validate() const {
  if (n_admissions == 0) throw UsageError("synth: n_admissions must be > 0");
  if (n_signs == 0) throw UsageError("synth: n_signs must be > 0");
  if (n_informative > n_signs) {
    throw UsageError("synth: n_informative exceeds n_signs");
  }
  if (hours == 0) throw UsageError("synth: hours must be > 0");
  if (rates.size() != 1 && rates.size() != n_signs) {
    throw UsageError("synth: give one rate or one rate per sign");
  }
  for (double r : rates) {
    if (!(r > 0.0 && r <= 1.0)) throw UsageError("synth: rates must be in (0, 1]");
  }
  if (!(label_noise >= 0.0 && label_noise < 0.5)) {
    throw UsageError("synth: label_noise must be in [0, 0.5)");
  }
  if (!(prevalence > 0.0 && prevalence < 1.0)) {
    throw UsageError("synth: prevalence must be in (0, 1)");
  }
  if (!(label_sharpness > 0.0) || !std::isfinite(label_sharpness)) {
    throw UsageError("synth: label_sharpness must be > 0");
  }
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw UsageError("synth: bound must be > 0");
  }
  if (!(step_sd >= 0.0 && step_sd <= bound)) {
    throw UsageError("synth: step_sd must be in [0, bound]");
  }
  if (smoothing == 0) throw UsageError("synth: smoothing must be >= 1");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw UsageError("synth: noise_sd must be >= 0");
  }
  if (!(gap_length >= 1.0) || !std::isfinite(gap_length)) {
    throw UsageError("synth: gap_length must be >= 1");
  }
}

SignSeries GroundTruth::as_series(std::size_t admission,
                                  std::size_t sign) const {
  SignSeries s(admission_ids[admission], sign_ids[sign], Timestamp{}, hours);
  const auto v = series(admission, sign);
  for (std::size_t t = 0; t < hours; ++t) s.set(t, v[t]);
  return s;
}

std::string admission_name(std::size_t index, std::size_t count) {
  return padded('A', index + 1, std::max<std::size_t>(6, digit_count(count)));
}

std::string sign_name(std::size_t index, std::size_t count) {
  return padded('S', index + 1, std::max<std::size_t>(2, digit_count(count)));
}

Generated generate(const SynthSpec& spec, int workers) {
  spec.validate();
  const std::size_t n = spec.n_admissions;
  const std::size_t k = spec.n_signs;
  const std::size_t h = spec.hours;

  std::vector<SignShape> shapes(k);
  {
    Rng rng(derive_seed(spec.seed, kSignStream));
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < spec.n_informative; ++i) {
      std::swap(order[i], order[i + rng.index(k - i)]);
      shapes[order[i]].informative = true;
    }
    for (auto& s : shapes) {
      s.offset = rng.uniform(50.0, 150.0);
      s.scale = rng.uniform(5.0, 20.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    }
  }

  Generated out;
  auto& cohort = out.cohort;
  auto& truth = out.truth;
  truth.hours = h;
  truth.admission_ids.reserve(n);
  for (std::size_t a = 0; a < n; ++a) {
    truth.admission_ids.push_back(admission_name(a, n));
  }
  for (std::size_t s = 0; s < k; ++s) {
    truth.sign_ids.push_back(sign_name(s, k));
    if (shapes[s].informative) truth.informative.push_back(truth.sign_ids.back());
  }
  if (spec.keep_truth) truth.values.assign(n * k * h, 0.0);

  cohort.signs.resize(k);
  for (std::size_t s = 0; s < k; ++s) cohort.signs[s].sign_id = truth.sign_ids[s];
  cohort.admissions.resize(n);

  double expected = 0.0;
  for (std::size_t s = 0; s < k; ++s) expected += spec.rate(s);
  cohort.events.reserve(static_cast<std::size_t>(
      expected * static_cast<double>(n * h) * 1.01 + 1024.0));

  std::vector<double> endpoints(n);
  std::vector<AdmissionOutput> chunk(kChunk);
  for (std::size_t first = 0; first < n; first += kChunk) {
    const std::size_t count = std::min(kChunk, n - first);
    parallel_for(count, workers, [&](std::size_t i) {
      const std::size_t a = first + i;
      Rng rng(derive_seed(spec.seed, a));
      auto& o = chunk[i];
      o.events.clear();
      o.discharge = Timestamp{kBaseMinutes + static_cast<std::int64_t>(
                                                 rng.index(kYearMinutes))};
      const Timestamp grid_end = ceil_to_hour(o.discharge);

      std::vector<double> scratch;
      std::vector<double> shared;
      std::vector<double> own;
      std::vector<char> keep;
      latent_walk(spec, rng, scratch, shared);
      o.endpoint = shared[h - 1];

      for (std::size_t s = 0; s < k; ++s) {
        const auto& shape = shapes[s];
        const std::vector<double>* walk = &shared;
        if (!shape.informative) {
          latent_walk(spec, rng, scratch, own);
          walk = &own;
        }
        observation_mask(spec, spec.rate(s), rng, keep);
        double* dense =
            spec.keep_truth ? truth.values.data() + (a * k + s) * h : nullptr;
        for (std::size_t t = 0; t < h; ++t) {
          const double v =
              shape.offset +
              shape.scale * ((*walk)[t] + spec.noise_sd * rng.normal());
          if (dense) dense[t] = v;
          // Always draw the minute so masking does not shift later draws.
          const auto minute = static_cast<std::int64_t>(rng.index(60)) + 1;
          if (!keep[t]) continue;
          const Timestamp slot_start = grid_end.plus_hours(
              -static_cast<std::int64_t>(h - t));
          o.events.push_back({static_cast<std::uint32_t>(a),
                              static_cast<std::uint32_t>(s),
                              Timestamp{slot_start.minutes + minute}, v});
        }
      }
    });
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t a = first + i;
      cohort.admissions[a].admission_id = truth.admission_ids[a];
      cohort.admissions[a].discharge_time = chunk[i].discharge;
      endpoints[a] = chunk[i].endpoint;
      cohort.events.insert(cohort.events.end(), chunk[i].events.begin(),
                           chunk[i].events.end());
    }
  }
  chunk.clear();
  chunk.shrink_to_fit();

  // Flips move the prevalence toward 1/2; aim the clean labels so the noisy
  // ones land on target.
  const double eps = spec.label_noise;
  const double clean_target =
      std::clamp((spec.prevalence - eps) / (1.0 - 2.0 * eps), 1e-6, 1.0 - 1e-6);
  const double b = solve_offset(endpoints, spec.label_sharpness, clean_target);
  Rng label_rng(derive_seed(spec.seed, kLabelStream));
  truth.labels.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double p = logistic(spec.label_sharpness * endpoints[a] + b);
    int y = label_rng.uniform01() < p ? 1 : 0;
    if (label_rng.bernoulli(eps)) y = 1 - y;
    truth.labels[a] = y;
    cohort.admissions[a].expire_flag = y;
  }
  cohort.recount_signs();
  return out;
}

void write_truth(const GroundTruth& truth, const std::filesystem::path& matrix,
                 const std::filesystem::path& informative) {
  if (truth.values.empty()) {
    throw UsageError("ground truth was not retained");
  }
  std::vector<SignSeries> rows;
  rows.reserve(truth.admission_ids.size() * truth.sign_ids.size());
  for (std::size_t a = 0; a < truth.admission_ids.size(); ++a) {
    for (std::size_t s = 0; s < truth.sign_ids.size(); ++s) {
      rows.push_back(truth.as_series(a, s));
    }
  }
  std::vector<const SignSeries*> ptrs;
  ptrs.reserve(rows.size());
  for (const auto& r : rows) ptrs.push_back(&r);
  ingest::write_series_matrix(ptrs, matrix);

  auto out = ingest::open_output(informative);
  out << "sign_id\n";
  for (const auto& id : truth.informative) out << ingest::csv_field(id) << '\n';
  if (!out) throw UsageError("write failed: " + informative.string());
}

}  // namespace medlens::synth
