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

#include "medlens/quality.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "medlens/error.h"
#include "medlens/parallel.h"

namespace medlens::quality {

QualityReport missing_metrics(const SeriesSet& series) {
  const std::size_t n_adm = series.n_admissions();
  const std::size_t n_sign = series.n_signs();
  const std::size_t hours = series.hours;
  if (n_adm == 0) throw DataError("missing-rate metrics need admissions");
  if (n_sign == 0) throw DataError("missing-rate metrics need signs");

  QualityReport report;
  report.n_signs_considered = n_sign;
  report.hours = hours;

  std::vector<std::size_t> patients_with(n_sign, 0);
  std::vector<std::size_t> hours_with(n_sign, 0);
  report.metric_c.reserve(n_adm);
  report.metric_d.reserve(n_adm);

  for (std::size_t a = 0; a < n_adm; ++a) {
    std::size_t signs_present = 0;
    std::size_t slots_present = 0;
    for (std::size_t s = 0; s < n_sign; ++s) {
      const std::size_t observed = series.at(a, s).observed_count();
      hours_with[s] += observed;
      slots_present += observed;
      if (observed > 0) {
        ++patients_with[s];
        ++signs_present;
      }
    }
    const double k = static_cast<double>(n_sign);
    report.metric_c.push_back(
        {series.admission_ids[a], 1.0 - static_cast<double>(signs_present) / k});
    report.metric_d.push_back(
        {series.admission_ids[a],
         1.0 - static_cast<double>(slots_present) /
                   (k * static_cast<double>(hours))});
  }

  const double count_p = static_cast<double>(n_adm);
  const double count_r = count_p * static_cast<double>(hours);
  for (std::size_t s = 0; s < n_sign; ++s) {
    report.metric_a.push_back(
        {series.sign_ids[s],
         1.0 - static_cast<double>(patients_with[s]) / count_p});
    report.metric_b.push_back(
        {series.sign_ids[s], 1.0 - static_cast<double>(hours_with[s]) / count_r});
  }
  return report;
}

std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

PearsonScore pearson_sign_label(const SeriesSet& series,
                                std::span<const int> labels,
                                std::size_t sign_column) {
  if (labels.size() != series.n_admissions()) {
    throw UsageError("label count does not match admissions");
  }
  std::vector<double> x, y;
  x.reserve(series.n_admissions());
  y.reserve(series.n_admissions());
  for (std::size_t a = 0; a < series.n_admissions(); ++a) {
    const SignSeries& s = series.at(a, sign_column);
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : s.raw()) {
      if (!std::isnan(v)) {
        sum += v;
        ++n;
      }
    }
    if (n == 0) continue;
    x.push_back(sum / static_cast<double>(n));
    y.push_back(static_cast<double>(labels[a]));
  }
  return PearsonScore{series.sign_ids[sign_column], pearson(x, y), x.size()};
}

std::vector<int> labels_for(const SeriesSet& series, const Cohort& cohort) {
  std::unordered_map<std::string_view, int> by_id;
  by_id.reserve(cohort.admissions.size());
  for (const auto& a : cohort.admissions) by_id.emplace(a.admission_id, a.expire_flag);
  std::vector<int> labels;
  labels.reserve(series.n_admissions());
  for (const auto& id : series.admission_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw DataError("admission '" + id + "' not in cohort");
    }
    labels.push_back(it->second);
  }
  return labels;
}

PearsonScore pearson_sign_label(const SeriesSet& series, const Cohort& cohort,
                                std::string_view sign_id) {
  const auto column = series.sign_column(sign_id);
  if (!column) {
    throw UsageError("sign '" + std::string(sign_id) + "' not in series set");
  }
  const auto labels = labels_for(series, cohort);
  return pearson_sign_label(series, labels, *column);
}

QualityReport measure(const SeriesSet& series, std::span<const int> labels,
                      int workers) {
  QualityReport report = missing_metrics(series);
  report.pearson.resize(series.n_signs());
  parallel_for(series.n_signs(), workers, [&](std::size_t s) {
    report.pearson[s] = pearson_sign_label(series, labels, s);
  });
  return report;
}

std::vector<std::string> top_signs_by_count(const Cohort& cohort,
                                            std::size_t k) {
  if (k > cohort.signs.size()) {
    throw UsageError("requested " + std::to_string(k) +
                     " signs but the catalog holds " +
                     std::to_string(cohort.signs.size()));
  }
  std::vector<std::size_t> order(cohort.signs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = cohort.signs[a];
    const auto& sb = cohort.signs[b];
    if (sa.record_count != sb.record_count) {
      return sa.record_count > sb.record_count;
    }
    return sa.sign_id < sb.sign_id;
  });
  std::vector<std::string> top;
  top.reserve(k);
  for (std::size_t i = 0; i < k; ++i) top.push_back(cohort.signs[order[i]].sign_id);
  return top;
}

double record_coverage(const Cohort& cohort,
                       std::span<const std::string> signs) {
  std::size_t total = 0, covered = 0;
  for (const auto& s : cohort.signs) total += s.record_count;
  if (total == 0) return 0.0;
  for (const auto& id : signs) {
    if (const auto idx = cohort.find_sign(id)) {
      covered += cohort.signs[*idx].record_count;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(total);
}

Selection select_signs(const QualityReport& report, const Cohort& cohort,
                       std::size_t k_freq, std::size_t k_corr) {
  if (k_corr > k_freq) throw UsageError("k_corr must be <= k_freq");
  const auto frequent = top_signs_by_count(cohort, k_freq);

  std::unordered_map<std::string_view, std::optional<double>> r_by_sign;
  for (const auto& p : report.pearson) r_by_sign.emplace(p.sign_id, p.r);

  struct Candidate {
    std::string_view sign_id;
    double abs_r;
  };
  std::vector<Candidate> defined;
  for (const auto& id : frequent) {
    const auto it = r_by_sign.find(id);
    if (it != r_by_sign.end() && it->second) {
      defined.push_back({id, std::abs(*it->second)});
    }
  }
  std::sort(defined.begin(), defined.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.abs_r != b.abs_r) return a.abs_r > b.abs_r;
              return a.sign_id < b.sign_id;
            });

  Selection selection;
  if (defined.size() < k_corr) {
    selection.findings.push_back(
        "only " + std::to_string(defined.size()) + " of " +
        std::to_string(k_freq) +
        " frequent signs have a defined correlation; requested " +
        std::to_string(k_corr));
  }
  const std::size_t keep = std::min(k_corr, defined.size());
  for (std::size_t i = 0; i < keep; ++i) {
    selection.signs.emplace_back(defined[i].sign_id);
  }
  return selection;
}

Histogram correlation_histogram(const QualityReport& report,
                                double bin_width) {
  if (!(bin_width > 0.0)) throw UsageError("bin_width must be > 0");
  const auto n_bins =
      static_cast<std::size_t>(std::ceil(2.0 / bin_width - 1e-9));
  Histogram hist;
  hist.bins.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    // Edges are snapped to 1e-12 so files show -0.9 rather than
    // -0.8999999999999999.
    auto edge = [&](std::size_t k) {
      const double x = -1.0 + static_cast<double>(k) * bin_width;
      return std::min(1.0, std::round(x * 1e12) / 1e12);
    };
    hist.bins[b].lo = edge(b);
    hist.bins[b].hi = edge(b + 1);
  }
  for (const auto& p : report.pearson) {
    if (!p.r) {
      ++hist.undefined;
      continue;
    }
    // The epsilon keeps values sitting on a bin edge (e.g. -0.1 with 0.1
    // bins) out of the bin below after rounding.
    const double pos = (*p.r + 1.0) / bin_width + 1e-9;
    auto b = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    if (b >= n_bins) b = n_bins - 1;
    ++hist.bins[b].count;
  }
  return hist;
}

}  // namespace medlens::quality
