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

// CART trees and random forests for regression and binary classification.
//
// Trees split on `x[feature] <= threshold` (left) versus `>` (right), where
// thresholds are midpoints between consecutive distinct feature values of the
// node. Regression minimizes the summed squared error of the two children,
// classification the count-weighted Gini impurity. Among equally good splits
// the lowest feature index wins, then the lowest threshold.
//
// Forest training is reproducible: tree i draws its bootstrap sample and its
// per-node feature subsets from Rng(derive_seed(seed, i)), the bootstrap
// first, then nodes in depth-first, left-first order. The worker count has
// no effect on the result.

#ifndef MEDLENS_FOREST_H_
#define MEDLENS_FOREST_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "medlens/model.h"

namespace medlens::forest {

enum class Task { kRegression, kClassification };

// Column-major feature matrix with one target per row. Classification
// targets are 0.0 or 1.0.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t n_rows, std::size_t n_features)
      : n_rows_(n_rows),
        n_features_(n_features),
        values_(n_rows * n_features, 0.0),
        targets_(n_rows, 0.0) {}

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_features() const { return n_features_; }

  double at(std::size_t row, std::size_t feature) const {
    return values_[feature * n_rows_ + row];
  }
  void set(std::size_t row, std::size_t feature, double v) {
    values_[feature * n_rows_ + row] = v;
  }
  std::span<const double> column(std::size_t feature) const {
    return {values_.data() + feature * n_rows_, n_rows_};
  }
  double target(std::size_t row) const { return targets_[row]; }
  void set_target(std::size_t row, double y) { targets_[row] = y; }
  std::span<const double> targets() const { return targets_; }

  // Row-major convenience constructor; all rows must share one length.
  static Dataset from_rows(const std::vector<std::vector<double>>& rows,
                           std::span<const double> targets);

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_features_ = 0;
  std::vector<double> values_;
  std::vector<double> targets_;
};

struct Node {
  // -1 marks a leaf.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Mean target of the node's samples: the prediction when the node is a
  // leaf (class-1 fraction for classification).
  double value = 0.0;
  std::uint32_t n_samples = 0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const Node&, const Node&) = default;
};

// Nodes are stored depth-first, left subtree before right; the root is
// node 0.
struct Tree {
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const {
    std::int32_t i = 0;
    while (nodes[i].feature >= 0) {
      const Node& n = nodes[i];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[i].value;
  }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  // Weighted child impurity; lower is better.
  double score = 0.0;
};

// One evaluated threshold of a single feature.
struct Candidate {
  double threshold = 0.0;
  double score = 0.0;
  std::size_t n_left = 0;
};

// Impurity of a sample multiset: summed squared error around the mean for
// regression, n * (1 - p0^2 - p1^2) for classification.
double impurity(std::span<const double> targets, Task task);

// Feature subset size for p features.
std::size_t resolve_mtry(MtryRule rule, Task task, std::size_t p);

// Every admissible threshold of `feature` over `samples` with its score,
// computed by one incremental sweep over the sorted values. A threshold is
// admissible when both children keep at least min_leaf samples.
std::vector<Candidate> sweep_feature(const Dataset& data,
                                     std::span<const std::uint32_t> samples,
                                     std::size_t feature, Task task,
                                     std::size_t min_leaf);

// Best admissible split over `features` (ascending), or nullopt when none
// lowers the node impurity.
std::optional<Split> best_split(const Dataset& data,
                                std::span<const std::uint32_t> samples,
                                std::span<const std::size_t> features,
                                Task task, std::size_t min_leaf);

// Grows one tree on the given sample multiset (duplicates allowed). No
// bootstrap is drawn here; `seed` drives the per-node feature subsets.
// Throws UsageError on an empty sample set.
Tree fit_tree(const Dataset& data, std::span<const std::uint32_t> samples,
              const ForestParams& params, Task task, std::uint64_t seed);
// All rows of `data`.
Tree fit_tree(const Dataset& data, const ForestParams& params, Task task,
              std::uint64_t seed);

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(Task task, std::size_t n_features, ForestParams params,
              std::uint64_t seed, std::vector<Tree> trees);

  Task task() const { return task_; }
  std::size_t n_features() const { return n_features_; }
  const ForestParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Tree>& trees() const { return trees_; }

  // Mean of the tree outputs. Throws UsageError on a length mismatch or a
  // non-finite feature.
  double predict(std::span<const double> x) const;
  // Same without argument checks; for hot loops that build x themselves.
  double predict_unchecked(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return sum / static_cast<double>(trees_.size());
  }

  // Row-major batch of rows.size() / n_features() rows. Tree-major
  // traversal keeps one tree hot in cache; per row the trees are summed in
  // the same order as predict_unchecked, so results are bit-identical.
  void predict_batch(std::span<const double> rows, std::span<double> out) const;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;

 private:
  Task task_ = Task::kRegression;
  std::size_t n_features_ = 0;
  ForestParams params_;
  std::uint64_t seed_ = 0;
  std::vector<Tree> trees_;
};

// Throws UsageError on an empty dataset.
ForestModel fit_forest(const Dataset& data, const ForestParams& params,
                       Task task, std::uint64_t seed, int workers = 1);

// Versioned text format, one node per line; see forest_io.cc. Reals are
// written as shortest round-trip decimals so a reload is bit-exact.
void write_forest(const ForestModel& model, std::ostream& out);
ForestModel read_forest(std::istream& in);
void save_forest(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_forest(const std::filesystem::path& path);

}  // namespace medlens::forest

#endif  // MEDLENS_FOREST_H_
