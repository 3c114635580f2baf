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

// Binary classification metrics.
//
// A score counts as a positive prediction when score >= threshold.
// AUC-ROC is the Mann-Whitney statistic (ties between a positive and a
// negative count one half), computed from average ranks. AUC-PR is average
// precision: sum over descending distinct scores of (R_k - R_{k-1}) * P_k,
// tied scores entering as one step.

#ifndef MEDLENS_METRICS_H_
#define MEDLENS_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>

namespace medlens::eval {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Throws UsageError on mismatched lengths, labels outside {0, 1} or
// non-finite scores.
Confusion confusion(std::span<const double> scores, std::span<const int> labels,
                    double threshold = 0.5);

// 0 for an empty matrix.
double accuracy(const Confusion& c);
// 2TP / (2TP + FP + FN); 0 when there is no positive at all.
double f1(const Confusion& c);

// nullopt unless both classes are present.
std::optional<double> auc_roc(std::span<const double> scores,
                              std::span<const int> labels);
std::optional<double> auc_pr(std::span<const double> scores,
                             std::span<const int> labels);

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  std::optional<double> auc_roc;
  std::optional<double> auc_pr;
  Confusion confusion;
};

Metrics compute_metrics(std::span<const double> scores,
                        std::span<const int> labels, double threshold = 0.5);

}  // namespace medlens::eval

#endif  // MEDLENS_METRICS_H_
