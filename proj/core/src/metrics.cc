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

#include "medlens/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "medlens/error.h"

namespace medlens::eval {
namespace {

void check(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw UsageError("scores and labels differ in length");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw UsageError("labels must be 0 or 1");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw UsageError("scores must be finite");
  }
}

std::vector<std::size_t> order_by_score(std::span<const double> scores,
                                        bool descending) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  return idx;
}

}  // namespace

Confusion confusion(std::span<const double> scores, std::span<const int> labels,
                    double threshold) {
  check(scores, labels);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      ++(predicted ? c.tp : c.fn);
    } else {
      ++(predicted ? c.fp : c.tn);
    }
  }
  return c;
}

double accuracy(const Confusion& c) {
  const std::size_t n = c.total();
  return n == 0 ? 0.0
                : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
}

double f1(const Confusion& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0
                    : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

std::optional<double> auc_roc(std::span<const double> scores,
                              std::span<const int> labels) {
  check(scores, labels);
  const auto idx = order_by_score(scores, false);
  const std::size_t n = idx.size();
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    // Ranks i+1 .. j share their average.
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) {
        rank_sum += avg;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double p = static_cast<double>(n_pos);
  return (rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(n_neg));
}

std::optional<double> auc_pr(std::span<const double> scores,
                             std::span<const int> labels) {
  check(scores, labels);
  const std::size_t n_pos =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (n_pos == 0 || n_pos == labels.size()) return std::nullopt;
  const auto idx = order_by_score(scores, true);
  const std::size_t n = idx.size();
  std::size_t tp = 0;
  std::size_t seen = 0;
  double prev_recall = 0.0;
  double ap = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) {
      tp += static_cast<std::size_t>(labels[idx[j]]);
      ++j;
    }
    seen = j;
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision =
        static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

Metrics compute_metrics(std::span<const double> scores,
                        std::span<const int> labels, double threshold) {
  Metrics m;
  m.confusion = confusion(scores, labels, threshold);
  m.accuracy = accuracy(m.confusion);
  m.f1 = f1(m.confusion);
  m.auc_roc = auc_roc(scores, labels);
  m.auc_pr = auc_pr(scores, labels);
  return m;
}

}  // namespace medlens::eval
