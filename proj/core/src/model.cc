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

#include "medlens/model.h"

#include <algorithm>
#include <bit>
#include <unordered_set>

#include "medlens/error.h"

namespace medlens {

std::optional<std::uint32_t> Cohort::find_sign(std::string_view sign_id) const {
  const auto it = std::lower_bound(
      signs.begin(), signs.end(), sign_id,
      [](const SignInfo& s, std::string_view id) { return s.sign_id < id; });
  if (it == signs.end() || it->sign_id != sign_id) return std::nullopt;
  return static_cast<std::uint32_t>(it - signs.begin());
}

void Cohort::recount_signs() {
  for (auto& s : signs) s.record_count = 0;
  for (const auto& e : events) {
    if (e.sign < signs.size()) ++signs[e.sign].record_count;
  }
}

std::vector<std::string> validate_cohort(const Cohort& cohort) {
  std::vector<std::string> findings;

  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < cohort.admissions.size(); ++i) {
    const auto& a = cohort.admissions[i];
    if (!seen.insert(a.admission_id).second) {
      findings.push_back("admission " + std::to_string(i) +
                         ": duplicate admission_id '" + a.admission_id + "'");
    }
    if (a.expire_flag != 0 && a.expire_flag != 1) {
      findings.push_back("admission '" + a.admission_id +
                         "': expire_flag " + std::to_string(a.expire_flag) +
                         " not in {0,1}");
    }
  }

  for (std::size_t i = 1; i < cohort.signs.size(); ++i) {
    if (!(cohort.signs[i - 1].sign_id < cohort.signs[i].sign_id)) {
      findings.push_back("sign catalog not strictly sorted at '" +
                         cohort.signs[i].sign_id + "'");
    }
  }

  std::vector<std::size_t> counts(cohort.signs.size(), 0);
  for (std::size_t i = 0; i < cohort.events.size(); ++i) {
    const auto& e = cohort.events[i];
    if (e.admission >= cohort.admissions.size()) {
      findings.push_back("event " + std::to_string(i) +
                         ": admission index " + std::to_string(e.admission) +
                         " absent from admissions");
    }
    if (e.sign >= cohort.signs.size()) {
      findings.push_back("event " + std::to_string(i) + ": sign index " +
                         std::to_string(e.sign) + " absent from sign catalog");
    } else {
      ++counts[e.sign];
    }
    if (!std::isfinite(e.value)) {
      findings.push_back("event " + std::to_string(i) + ": non-finite value");
    }
  }

  for (std::size_t s = 0; s < cohort.signs.size(); ++s) {
    if (counts[s] != cohort.signs[s].record_count) {
      findings.push_back("sign '" + cohort.signs[s].sign_id +
                         "': record_count " +
                         std::to_string(cohort.signs[s].record_count) +
                         " but " + std::to_string(counts[s]) + " events");
    }
  }
  return findings;
}

SignSeries::SignSeries(std::string admission_id, std::string sign_id,
                       Timestamp grid_end, std::size_t hours)
    : admission_id_(std::move(admission_id)),
      sign_id_(std::move(sign_id)),
      grid_end_(grid_end),
      grid_(hours, kMissing) {}

std::size_t SignSeries::observed_count() const {
  return static_cast<std::size_t>(std::count_if(
      grid_.begin(), grid_.end(), [](double v) { return !std::isnan(v); }));
}

bool operator==(const SignSeries& a, const SignSeries& b) {
  if (a.admission_id_ != b.admission_id_ || a.sign_id_ != b.sign_id_ ||
      a.grid_end_ != b.grid_end_ || a.grid_.size() != b.grid_.size()) {
    return false;
  }
  for (std::size_t t = 0; t < a.grid_.size(); ++t) {
    const bool ma = std::isnan(a.grid_[t]);
    const bool mb = std::isnan(b.grid_[t]);
    if (ma != mb) return false;
    if (!ma && std::bit_cast<std::uint64_t>(a.grid_[t]) !=
                   std::bit_cast<std::uint64_t>(b.grid_[t])) {
      return false;
    }
  }
  return true;
}

std::optional<std::size_t> SeriesSet::sign_column(
    std::string_view sign_id) const {
  for (std::size_t s = 0; s < sign_ids.size(); ++s) {
    if (sign_ids[s] == sign_id) return s;
  }
  return std::nullopt;
}

void PipelineConfig::validate() const {
  if (hours < 1) throw UsageError("hours must be >= 1");
  if (window < 1) throw UsageError("window must be >= 1");
  if (k_corr < 1) throw UsageError("k_corr must be >= 1");
  if (k_corr > k_freq) throw UsageError("k_corr must be <= k_freq");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test_fraction must lie in (0, 1)");
  }
  if (sample_limit && *sample_limit < 2) {
    throw UsageError("sample_limit must be >= 2 when set");
  }
  for (const auto* p : {&classifier, &interpolator}) {
    if (p->n_trees < 1) throw UsageError("n_trees must be >= 1");
    if (p->min_leaf < 1) throw UsageError("min_leaf must be >= 1");
  }
}

std::string_view to_string(MtryRule rule) {
  switch (rule) {
    case MtryRule::kAuto: return "auto";
    case MtryRule::kSqrt: return "sqrt";
    case MtryRule::kThird: return "third";
    case MtryRule::kAll: return "all";
  }
  return "auto";
}

std::string_view to_string(VariationStat stat) {
  return stat == VariationStat::kRange ? "range" : "variance";
}

MtryRule parse_mtry_rule(std::string_view name) {
  if (name == "auto") return MtryRule::kAuto;
  if (name == "sqrt") return MtryRule::kSqrt;
  if (name == "third") return MtryRule::kThird;
  if (name == "all") return MtryRule::kAll;
  throw UsageError("unknown mtry rule '" + std::string(name) +
                   "' (expected auto, sqrt, third, all)");
}

VariationStat parse_variation(std::string_view name) {
  if (name == "range") return VariationStat::kRange;
  if (name == "variance") return VariationStat::kVariance;
  throw UsageError("unknown variation statistic '" + std::string(name) +
                   "' (expected range, variance)");
}

}  // namespace medlens
