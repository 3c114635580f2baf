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

// Mortality classifiers behind one interface. The random forest is the
// product; KNN and logistic regression are cheap comparison baselines.

#ifndef MEDLENS_CLASSIFIERS_H_
#define MEDLENS_CLASSIFIERS_H_

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "medlens/forest.h"

namespace medlens::eval {

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string_view name() const = 0;
  // Throws DataError when the targets hold a single class.
  virtual void fit(const forest::Dataset& train) = 0;
  // Class-1 score per row, in [0, 1].
  virtual std::vector<double> score(const forest::Dataset& rows) const = 0;
};

class ForestClassifier : public Classifier {
 public:
  ForestClassifier(ForestParams params, std::uint64_t seed, int workers = 1)
      : params_(params), seed_(seed), workers_(workers) {}
  std::string_view name() const override { return "random_forest"; }
  void fit(const forest::Dataset& train) override;
  std::vector<double> score(const forest::Dataset& rows) const override;
  const forest::ForestModel& model() const { return model_; }
  forest::ForestModel release() { return std::move(model_); }

 private:
  ForestParams params_;
  std::uint64_t seed_;
  int workers_;
  forest::ForestModel model_;
};

// Share of positives among the k nearest training rows (Euclidean; ties
// broken by training row order).
class KnnClassifier : public Classifier {
 public:
  explicit KnnClassifier(std::size_t k = 5) : k_(k) {}
  std::string_view name() const override { return "knn"; }
  void fit(const forest::Dataset& train) override;
  std::vector<double> score(const forest::Dataset& rows) const override;

 private:
  std::size_t k_;
  forest::Dataset train_;
};

// Batch gradient descent on standardized features with a small L2 penalty.
class LogisticClassifier : public Classifier {
 public:
  explicit LogisticClassifier(std::size_t iterations = 300,
                              double learning_rate = 0.5, double l2 = 1e-3)
      : iterations_(iterations), learning_rate_(learning_rate), l2_(l2) {}
  std::string_view name() const override { return "logistic"; }
  void fit(const forest::Dataset& train) override;
  std::vector<double> score(const forest::Dataset& rows) const override;

 private:
  std::size_t iterations_;
  double learning_rate_;
  double l2_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

// Throws DataError unless both classes occur among the targets.
void require_two_classes(const forest::Dataset& train);

}  // namespace medlens::eval

#endif  // MEDLENS_CLASSIFIERS_H_
