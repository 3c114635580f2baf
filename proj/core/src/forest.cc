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

#include "medlens/forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "medlens/error.h"
#include "medlens/parallel.h"
#include "medlens/random.h"

namespace medlens::forest {
namespace {

// A split must lower the node impurity by more than this fraction of
// max(1, parent impurity); anything smaller is rounding noise.
constexpr double kMinGain = 1e-12;
// Scores closer than this (relative) count as tied; the earlier candidate
// in (feature, threshold) order is kept.
constexpr double kTieTolerance = 1e-9;

struct Pair {
  double x;
  double y;
};

double midpoint(double a, double b) {
  const double m = a + (b - a) / 2.0;
  return (m < b) ? m : a;
}

double mean_target(const Dataset& data, std::span<const std::uint32_t> samples) {
  double sum = 0.0;
  for (auto i : samples) sum += data.target(i);
  return sum / static_cast<double>(samples.size());
}

double node_impurity(const Dataset& data,
                     std::span<const std::uint32_t> samples, Task task,
                     double center) {
  const double n = static_cast<double>(samples.size());
  if (task == Task::kRegression) {
    double sq = 0.0;
    for (auto i : samples) {
      const double d = data.target(i) - center;
      sq += d * d;
    }
    return sq;
  }
  double pos = 0.0;
  for (auto i : samples) pos += data.target(i);
  return n - (pos * pos + (n - pos) * (n - pos)) / n;
}

// Evaluates every admissible boundary of pairs sorted by x. Regression
// targets are centered on `center` before accumulating to limit
// cancellation in sum-of-squares differences.
template <typename OnCandidate>
void sweep_sorted(std::span<const Pair> pairs, Task task, std::size_t min_leaf,
                  double center, OnCandidate&& on_candidate) {
  const std::size_t n = pairs.size();
  if (n < 2) return;
  // Classification keeps raw 0/1 targets so the sums are exact counts.
  if (task == Task::kClassification) center = 0.0;
  double total_sum = 0.0, total_sq = 0.0;
  for (const auto& p : pairs) {
    const double y = p.y - center;
    total_sum += y;
    total_sq += y * y;
  }
  double left_sum = 0.0, left_sq = 0.0;
  const std::size_t lo = std::max<std::size_t>(min_leaf, 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double y = pairs[i].y - center;
    left_sum += y;
    left_sq += y * y;
    const std::size_t n_left = i + 1;
    if (n - n_left < lo) break;
    if (pairs[i].x == pairs[i + 1].x || n_left < lo) continue;

    const double nl = static_cast<double>(n_left);
    const double nr = static_cast<double>(n - n_left);
    double score;
    if (task == Task::kRegression) {
      const double right_sum = total_sum - left_sum;
      const double sse_l = std::max(0.0, left_sq - left_sum * left_sum / nl);
      const double sse_r = std::max(
          0.0, (total_sq - left_sq) - right_sum * right_sum / nr);
      score = sse_l + sse_r;
    } else {
      const double pos_l = left_sum;
      const double pos_r = total_sum - left_sum;
      const double gini_l = nl - (pos_l * pos_l + (nl - pos_l) * (nl - pos_l)) / nl;
      const double gini_r = nr - (pos_r * pos_r + (nr - pos_r) * (nr - pos_r)) / nr;
      score = gini_l + gini_r;
    }
    on_candidate(midpoint(pairs[i].x, pairs[i + 1].x), score, n_left);
  }
}

void gather_sorted(const Dataset& data, std::span<const std::uint32_t> samples,
                   std::size_t feature, std::vector<Pair>& pairs) {
  const auto column = data.column(feature);
  pairs.resize(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    pairs[k] = Pair{column[samples[k]], data.target(samples[k])};
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
}

std::optional<Split> best_split_impl(const Dataset& data,
                                     std::span<const std::uint32_t> samples,
                                     std::span<const std::size_t> features,
                                     Task task, std::size_t min_leaf,
                                     double center, double parent,
                                     std::vector<Pair>& pairs) {
  std::optional<Split> best;
  for (const std::size_t f : features) {
    gather_sorted(data, samples, f, pairs);
    if (pairs.front().x == pairs.back().x) continue;
    sweep_sorted(pairs, task, min_leaf, center,
                 [&](double threshold, double score, std::size_t) {
                   if (!best ||
                       score < best->score - kTieTolerance *
                                                 std::max(1.0, std::abs(best->score))) {
                     best = Split{f, threshold, score};
                   }
                 });
  }
  if (best && parent - best->score > kMinGain * std::max(1.0, parent)) {
    return best;
  }
  return std::nullopt;
}

bool is_pure(const Dataset& data, std::span<const std::uint32_t> samples) {
  const double first = data.target(samples.front());
  for (auto i : samples) {
    if (data.target(i) != first) return false;
  }
  return true;
}

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, const ForestParams& params, Task task,
             Rng& rng)
      : data_(data),
        params_(params),
        task_(task),
        rng_(rng),
        mtry_(resolve_mtry(params.mtry_rule, task, data.n_features())),
        permutation_(data.n_features()) {
    std::iota(permutation_.begin(), permutation_.end(), std::size_t{0});
  }

  Tree grow(std::vector<std::uint32_t> samples) {
    samples_ = std::move(samples);
    tree_.nodes.clear();
    grow_node(0, samples_.size(), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow_node(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto index = static_cast<std::int32_t>(tree_.nodes.size());
    std::span<const std::uint32_t> node_samples(samples_.data() + begin,
                                                end - begin);
    Node node;
    node.value = mean_target(data_, node_samples);
    node.n_samples = static_cast<std::uint32_t>(node_samples.size());
    tree_.nodes.push_back(node);

    if (depth >= params_.max_depth ||
        node_samples.size() < 2 * params_.min_leaf ||
        node_samples.size() < 2 || is_pure(data_, node_samples)) {
      return index;
    }

    const auto features = draw_features();
    const double parent =
        node_impurity(data_, node_samples, task_, node.value);
    const auto split = best_split_impl(data_, node_samples, features, task_,
                                       params_.min_leaf, node.value, parent,
                                       pairs_);
    if (!split) return index;

    const auto column = data_.column(split->feature);
    const double threshold = split->threshold;
    const auto mid = std::stable_partition(
        samples_.begin() + static_cast<std::ptrdiff_t>(begin),
        samples_.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::uint32_t i) { return column[i] <= threshold; });
    const auto middle = static_cast<std::size_t>(mid - samples_.begin());

    const std::int32_t left = grow_node(begin, middle, depth + 1);
    const std::int32_t right = grow_node(middle, end, depth + 1);
    Node& self = tree_.nodes[static_cast<std::size_t>(index)];
    self.feature = static_cast<std::int32_t>(split->feature);
    self.threshold = threshold;
    self.left = left;
    self.right = right;
    return index;
  }

  // Partial Fisher-Yates over a persistent permutation; the chosen subset
  // is returned in ascending order so ties resolve to the lowest index.
  std::vector<std::size_t> draw_features() {
    const std::size_t p = permutation_.size();
    if (mtry_ >= p) return permutation_sorted();
    for (std::size_t k = 0; k < mtry_; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng_.index(p - k));
      std::swap(permutation_[k], permutation_[j]);
    }
    std::vector<std::size_t> chosen(permutation_.begin(),
                                    permutation_.begin() +
                                        static_cast<std::ptrdiff_t>(mtry_));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  std::vector<std::size_t> permutation_sorted() const {
    std::vector<std::size_t> all(permutation_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }

  const Dataset& data_;
  const ForestParams& params_;
  Task task_;
  Rng& rng_;
  std::size_t mtry_;
  std::vector<std::size_t> permutation_;
  std::vector<std::uint32_t> samples_;
  std::vector<Pair> pairs_;
  Tree tree_;
};

}  // namespace

Dataset Dataset::from_rows(const std::vector<std::vector<double>>& rows,
                           std::span<const double> targets) {
  if (rows.size() != targets.size()) {
    throw UsageError("row count does not match target count");
  }
  const std::size_t p = rows.empty() ? 0 : rows.front().size();
  Dataset data(rows.size(), p);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != p) throw UsageError("ragged feature rows");
    for (std::size_t f = 0; f < p; ++f) data.set(r, f, rows[r][f]);
    data.set_target(r, targets[r]);
  }
  return data;
}

std::size_t Tree::depth() const {
  // Preorder layout: recompute depths with an explicit stack.
  std::size_t max_depth = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    max_depth = std::max(max_depth, d);
    const Node& n = nodes[static_cast<std::size_t>(i)];
    if (!n.is_leaf()) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return max_depth;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const Node& n) { return n.is_leaf(); }));
}

double impurity(std::span<const double> targets, Task task) {
  if (targets.empty()) return 0.0;
  const double n = static_cast<double>(targets.size());
  double sum = 0.0;
  for (double y : targets) sum += y;
  const double mean = sum / n;
  if (task == Task::kRegression) {
    double sq = 0.0;
    for (double y : targets) sq += (y - mean) * (y - mean);
    return sq;
  }
  return n - (sum * sum + (n - sum) * (n - sum)) / n;
}

std::size_t resolve_mtry(MtryRule rule, Task task, std::size_t p) {
  if (p == 0) return 0;
  if (rule == MtryRule::kAuto) {
    rule = task == Task::kClassification ? MtryRule::kSqrt : MtryRule::kThird;
  }
  std::size_t m = p;
  switch (rule) {
    case MtryRule::kSqrt:
      m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
      break;
    case MtryRule::kThird: m = (p + 2) / 3; break;
    case MtryRule::kAll:
    case MtryRule::kAuto: m = p; break;
  }
  return std::clamp<std::size_t>(m, 1, p);
}

std::vector<Candidate> sweep_feature(const Dataset& data,
                                     std::span<const std::uint32_t> samples,
                                     std::size_t feature, Task task,
                                     std::size_t min_leaf) {
  std::vector<Candidate> out;
  if (samples.empty()) return out;
  std::vector<Pair> pairs;
  gather_sorted(data, samples, feature, pairs);
  const double center = mean_target(data, samples);
  sweep_sorted(pairs, task, min_leaf, center,
               [&](double threshold, double score, std::size_t n_left) {
                 out.push_back(Candidate{threshold, score, n_left});
               });
  return out;
}

std::optional<Split> best_split(const Dataset& data,
                                std::span<const std::uint32_t> samples,
                                std::span<const std::size_t> features,
                                Task task, std::size_t min_leaf) {
  if (samples.size() < 2 || samples.size() < 2 * min_leaf) return std::nullopt;
  const double center = mean_target(data, samples);
  const double parent = node_impurity(data, samples, task, center);
  std::vector<Pair> pairs;
  return best_split_impl(data, samples, features, task, min_leaf, center,
                         parent, pairs);
}

namespace {

Tree grow_with(const Dataset& data, std::vector<std::uint32_t> samples,
               const ForestParams& params, Task task, Rng& rng) {
  if (samples.empty()) throw UsageError("cannot fit a tree on zero samples");
  TreeGrower grower(data, params, task, rng);
  return grower.grow(std::move(samples));
}

}  // namespace

Tree fit_tree(const Dataset& data, std::span<const std::uint32_t> samples,
              const ForestParams& params, Task task, std::uint64_t seed) {
  Rng rng(seed);
  return grow_with(data, {samples.begin(), samples.end()}, params, task, rng);
}

Tree fit_tree(const Dataset& data, const ForestParams& params, Task task,
              std::uint64_t seed) {
  std::vector<std::uint32_t> all(data.n_rows());
  std::iota(all.begin(), all.end(), 0u);
  return fit_tree(data, all, params, task, seed);
}

ForestModel::ForestModel(Task task, std::size_t n_features,
                         ForestParams params, std::uint64_t seed,
                         std::vector<Tree> trees)
    : task_(task),
      n_features_(n_features),
      params_(params),
      seed_(seed),
      trees_(std::move(trees)) {}

void ForestModel::predict_batch(std::span<const double> rows,
                                std::span<double> out) const {
  const std::size_t p = n_features_;
  const std::size_t n = out.size();
  if (rows.size() != n * p) {
    throw UsageError("batch holds " + std::to_string(rows.size()) +
                     " values, expected " + std::to_string(n * p));
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& t : trees_) {
    for (std::size_t r = 0; r < n; ++r) {
      out[r] += t.predict(rows.subspan(r * p, p));
    }
  }
  const auto count = static_cast<double>(trees_.size());
  for (auto& v : out) v /= count;
}

double ForestModel::predict(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw UsageError("feature vector has " + std::to_string(x.size()) +
                     " entries, model expects " + std::to_string(n_features_));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw UsageError("non-finite feature value");
  }
  if (trees_.empty()) throw UsageError("forest has no trees");
  return predict_unchecked(x);
}

ForestModel fit_forest(const Dataset& data, const ForestParams& params,
                       Task task, std::uint64_t seed, int workers) {
  const std::size_t n = data.n_rows();
  if (n == 0) throw UsageError("cannot fit a forest on zero samples");
  if (params.n_trees == 0) throw UsageError("forest needs n_trees >= 1");
  if (n > 0xFFFFFFFFu) throw UsageError("too many training rows");

  std::vector<Tree> trees(params.n_trees);
  parallel_for(params.n_trees, workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    std::vector<std::uint32_t> samples(n);
    if (params.bootstrap) {
      for (auto& s : samples) s = static_cast<std::uint32_t>(rng.index(n));
    } else {
      std::iota(samples.begin(), samples.end(), 0u);
    }
    trees[i] = grow_with(data, std::move(samples), params, task, rng);
  });
  return ForestModel(task, data.n_features(), params, seed, std::move(trees));
}

}  // namespace medlens::forest
