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

#include "medlens/classifiers.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "medlens/error.h"

namespace medlens::eval {

void require_two_classes(const forest::Dataset& train) {
  bool pos = false;
  bool neg = false;
  for (double y : train.targets()) {
    (y == 1.0 ? pos : neg) = true;
  }
  if (!pos || !neg) {
    throw DataError("training set holds a single class");
  }
}

void ForestClassifier::fit(const forest::Dataset& train) {
  require_two_classes(train);
  model_ = forest::fit_forest(train, params_, forest::Task::kClassification,
                              seed_, workers_);
}

std::vector<double> ForestClassifier::score(const forest::Dataset& rows) const {
  std::vector<double> out(rows.n_rows());
  std::vector<double> x(rows.n_features());
  for (std::size_t r = 0; r < rows.n_rows(); ++r) {
    for (std::size_t f = 0; f < x.size(); ++f) x[f] = rows.at(r, f);
    out[r] = model_.predict(x);
  }
  return out;
}

void KnnClassifier::fit(const forest::Dataset& train) {
  if (k_ == 0) throw UsageError("knn: k must be >= 1");
  require_two_classes(train);
  train_ = train;
}

std::vector<double> KnnClassifier::score(const forest::Dataset& rows) const {
  const std::size_t n = train_.n_rows();
  const std::size_t p = train_.n_features();
  if (rows.n_features() != p) throw UsageError("knn: feature count mismatch");
  const std::size_t k = std::min(k_, n);
  std::vector<double> out(rows.n_rows());
  std::vector<double> dist(n);
  std::vector<std::size_t> idx(n);
  for (std::size_t r = 0; r < rows.n_rows(); ++r) {
    std::fill(dist.begin(), dist.end(), 0.0);
    for (std::size_t f = 0; f < p; ++f) {
      const auto col = train_.column(f);
      const double v = rows.at(r, f);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = col[i] - v;
        dist[i] += d * d;
      }
    }
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                      idx.end(), [&](std::size_t a, std::size_t b) {
                        return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
                      });
    double pos = 0.0;
    for (std::size_t i = 0; i < k; ++i) pos += train_.target(idx[i]);
    out[r] = pos / static_cast<double>(k);
  }
  return out;
}

void LogisticClassifier::fit(const forest::Dataset& train) {
  require_two_classes(train);
  const std::size_t n = train.n_rows();
  const std::size_t p = train.n_features();
  mean_.assign(p, 0.0);
  scale_.assign(p, 1.0);
  for (std::size_t f = 0; f < p; ++f) {
    const auto col = train.column(f);
    double m = 0.0;
    for (double v : col) m += v;
    m /= static_cast<double>(n);
    double sq = 0.0;
    for (double v : col) sq += (v - m) * (v - m);
    const double sd = std::sqrt(sq / static_cast<double>(n));
    mean_[f] = m;
    scale_[f] = sd > 0.0 ? sd : 1.0;
  }

  // Standardized copy, column-major like the source.
  std::vector<double> z(n * p);
  for (std::size_t f = 0; f < p; ++f) {
    const auto col = train.column(f);
    for (std::size_t i = 0; i < n; ++i) {
      z[f * n + i] = (col[i] - mean_[f]) / scale_[f];
    }
  }

  weights_.assign(p, 0.0);
  bias_ = 0.0;
  std::vector<double> margin(n);
  std::vector<double> residual(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t it = 0; it < iterations_; ++it) {
    std::fill(margin.begin(), margin.end(), bias_);
    for (std::size_t f = 0; f < p; ++f) {
      const double w = weights_[f];
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) margin[i] += w * z[f * n + i];
    }
    double grad_bias = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = 1.0 / (1.0 + std::exp(-margin[i])) - train.target(i);
      grad_bias += residual[i];
    }
    for (std::size_t f = 0; f < p; ++f) {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += residual[i] * z[f * n + i];
      weights_[f] -= learning_rate_ * (g * inv_n + l2_ * weights_[f]);
    }
    bias_ -= learning_rate_ * grad_bias * inv_n;
  }
}

std::vector<double> LogisticClassifier::score(
    const forest::Dataset& rows) const {
  if (rows.n_features() != weights_.size()) {
    throw UsageError("logistic: feature count mismatch");
  }
  std::vector<double> margin(rows.n_rows(), bias_);
  for (std::size_t f = 0; f < weights_.size(); ++f) {
    const auto col = rows.column(f);
    for (std::size_t i = 0; i < rows.n_rows(); ++i) {
      margin[i] += weights_[f] * (col[i] - mean_[f]) / scale_[f];
    }
  }
  for (auto& m : margin) m = 1.0 / (1.0 + std::exp(-m));
  return margin;
}

}  // namespace medlens::eval
