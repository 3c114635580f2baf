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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "medlens/error.h"
#include "medlens/forest.h"
#include "oracles.h"
#include "temp_dir.h"

namespace medlens::forest {
namespace {

Dataset column_data(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::vector<double>> rows;
  for (double v : x) rows.push_back({v});
  return Dataset::from_rows(rows, y);
}

std::vector<std::uint32_t> all_rows(const Dataset& d) {
  std::vector<std::uint32_t> s(d.n_rows());
  std::iota(s.begin(), s.end(), 0u);
  return s;
}

const std::vector<std::size_t> kFirst{0};

TEST(BestSplit, StepFunction) {
  const auto d = column_data({1, 2, 3, 4}, {0, 0, 10, 10});
  const auto s = best_split(d, all_rows(d), kFirst, Task::kRegression, 1);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->threshold, 2.5);
  EXPECT_EQ(s->score, 0.0);
  const auto tree = fit_tree(d, {1, 16, 1, MtryRule::kAll, false},
                             Task::kRegression, 0);
  ASSERT_EQ(tree.nodes.size(), 3u);
  EXPECT_EQ(tree.nodes[tree.nodes[0].left].value, 0.0);
  EXPECT_EQ(tree.nodes[tree.nodes[0].right].value, 10.0);
}

TEST(BestSplit, ConstantTargetOrFeature) {
  const auto flat_y = column_data({1, 2, 3, 4}, {5, 5, 5, 5});
  EXPECT_FALSE(best_split(flat_y, all_rows(flat_y), kFirst, Task::kRegression, 1));
  const auto flat_x = column_data({2, 2, 2, 2}, {1, 5, 2, 8});
  EXPECT_FALSE(best_split(flat_x, all_rows(flat_x), kFirst, Task::kRegression, 1));
}

TEST(BestSplit, MinLeafBlocksSplit) {
  const auto d = column_data({1, 2, 3, 4}, {0, 10, 10, 10});
  const auto s = best_split(d, all_rows(d), kFirst, Task::kRegression, 2);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->threshold, 2.5);
  EXPECT_FALSE(best_split(d, all_rows(d), kFirst, Task::kRegression, 3));
}

TEST(BestSplit, TiesGoToLowestFeatureThenThreshold) {
  // Both features separate perfectly; feature 0 wins.
  const auto d = Dataset::from_rows({{1, 10}, {2, 20}, {3, 30}, {4, 40}},
                                    std::vector<double>{0, 0, 1, 1});
  const std::vector<std::size_t> both{0, 1};
  const auto s = best_split(d, all_rows(d), both, Task::kClassification, 1);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->feature, 0u);
  // Symmetric target: thresholds 1.5 and 3.5 tie; the lower is kept.
  const auto e = column_data({1, 2, 3, 4}, {1, 0, 0, 1});
  const auto t = best_split(e, all_rows(e), kFirst, Task::kClassification, 1);
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->threshold, 1.5);
}

TEST(Impurity, KnownValues) {
  EXPECT_DOUBLE_EQ(impurity(std::vector<double>{1, 2, 3}, Task::kRegression), 2.0);
  EXPECT_DOUBLE_EQ(impurity(std::vector<double>{0, 1, 1, 1}, Task::kClassification),
                   4 * (1 - 0.25 * 0.25 - 0.75 * 0.75));
  EXPECT_EQ(impurity({}, Task::kRegression), 0.0);
}

TEST(Mtry, Rules) {
  EXPECT_EQ(resolve_mtry(MtryRule::kAuto, Task::kClassification, 10), 4u);
  EXPECT_EQ(resolve_mtry(MtryRule::kAuto, Task::kRegression, 10), 4u);
  EXPECT_EQ(resolve_mtry(MtryRule::kThird, Task::kRegression, 6), 2u);
  EXPECT_EQ(resolve_mtry(MtryRule::kSqrt, Task::kRegression, 16), 4u);
  EXPECT_EQ(resolve_mtry(MtryRule::kAll, Task::kRegression, 7), 7u);
  EXPECT_EQ(resolve_mtry(MtryRule::kThird, Task::kRegression, 1), 1u);
}

Dataset random_instance(std::mt19937_64& gen, Task task, bool integer_grid) {
  const std::size_t n = 1 + gen() % 50;
  const std::size_t p = 1 + gen() % 3;
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(p));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : rows[i]) v = integer_grid ? static_cast<double>(gen() % 6) : u(gen);
    y[i] = task == Task::kClassification ? static_cast<double>(gen() % 2)
           : integer_grid                ? static_cast<double>(gen() % 4)
                                         : u(gen);
  }
  return Dataset::from_rows(rows, y);
}

void expect_same_tree(const Tree& got, const Tree& want, int trial) {
  ASSERT_EQ(got.nodes.size(), want.nodes.size()) << "trial " << trial;
  for (std::size_t i = 0; i < got.nodes.size(); ++i) {
    const auto& g = got.nodes[i];
    const auto& w = want.nodes[i];
    ASSERT_EQ(g.feature, w.feature) << "trial " << trial << " node " << i;
    ASSERT_EQ(g.left, w.left);
    ASSERT_EQ(g.right, w.right);
    ASSERT_EQ(g.n_samples, w.n_samples);
    ASSERT_NEAR(g.value, w.value, 1e-12);
    if (!g.is_leaf()) {
      ASSERT_NEAR(g.threshold, w.threshold, 1e-12);
    }
  }
}

TEST(TreeOracle, GreedyTreeNodeForNode) {
  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Task task = trial % 2 ? Task::kClassification : Task::kRegression;
    const auto d = random_instance(gen, task, trial % 3 == 0);
    const std::size_t min_leaf = 1 + gen() % 3;
    const std::size_t depth = 1 + gen() % 6;
    const auto tree = fit_tree(d, {1, depth, min_leaf, MtryRule::kAll, false},
                               task, gen());
    expect_same_tree(tree, oracle::greedy_tree(d, depth, min_leaf, task), trial);
  }
}

TEST(TreeOracle, SweepMatchesNaiveImpurity) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Task task = trial % 2 ? Task::kClassification : Task::kRegression;
    const auto d = random_instance(gen, task, trial % 3 == 0);
    const std::size_t min_leaf = 1 + gen() % 3;
    const auto rows = all_rows(d);
    for (std::size_t f = 0; f < d.n_features(); ++f) {
      const auto fast = sweep_feature(d, rows, f, task, min_leaf);
      const auto slow = oracle::naive_candidates(d, rows, f, task, min_leaf);
      ASSERT_EQ(fast.size(), slow.size()) << "trial " << trial;
      for (std::size_t k = 0; k < fast.size(); ++k) {
        ASSERT_EQ(fast[k].n_left, slow[k].n_left);
        ASSERT_NEAR(fast[k].threshold, slow[k].threshold, 1e-12);
        ASSERT_NEAR(fast[k].score, slow[k].score, 1e-10) << "trial " << trial;
      }
    }
    std::vector<double> ys(d.targets().begin(), d.targets().end());
    ASSERT_NEAR(impurity(d.targets(), task), oracle::naive_impurity(ys, task), 1e-10);
  }
}

TEST(FitTree, SingleSampleIsLeaf) {
  const auto d = column_data({3}, {7.5});
  const auto t = fit_tree(d, {}, Task::kRegression, 1);
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].value, 7.5);
  EXPECT_EQ(t.predict(std::vector<double>{100.0}), 7.5);
}

TEST(FitTree, SeparableDepthTwoIsPerfect) {
  // Class 1 iff x0 > 0 and x1 > 0: one split per dimension suffices.
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 200; ++i) {
    rows.push_back({u(gen), u(gen)});
    y.push_back(rows.back()[0] > 0 && rows.back()[1] > 0 ? 1.0 : 0.0);
  }
  const auto d = Dataset::from_rows(rows, y);
  const auto t = fit_tree(d, {1, 2, 1, MtryRule::kAll, false},
                          Task::kClassification, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_EQ(t.predict(rows[i]) >= 0.5 ? 1.0 : 0.0, y[i]);
  }
  EXPECT_LE(t.depth(), 2u);
}

TEST(FitTree, EmptyIsAnError) {
  EXPECT_THROW(fit_tree(Dataset(0, 2), {}, Task::kRegression, 0), UsageError);
  EXPECT_THROW(fit_forest(Dataset(0, 2), {}, Task::kRegression, 0), UsageError);
}

TEST(FitTree, DeterministicGivenSeed) {
  std::mt19937_64 gen(1);
  const auto d = random_instance(gen, Task::kRegression, false);
  const ForestParams p{1, 8, 1, MtryRule::kSqrt, true};
  EXPECT_EQ(fit_tree(d, p, Task::kRegression, 99), fit_tree(d, p, Task::kRegression, 99));
}

Dataset parabola(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({u(gen)});
    y.push_back(rows.back()[0] * rows.back()[0]);
  }
  return Dataset::from_rows(rows, y);
}

TEST(FitForest, BeatsConstantMeanOnParabola) {
  const auto train = parabola(500, 1);
  const auto test = parabola(500, 2);
  const auto model = fit_forest(train, {50, 16, 2, MtryRule::kAuto, true},
                                Task::kRegression, 5);
  double mean = 0.0;
  for (double y : train.targets()) mean += y;
  mean /= static_cast<double>(train.n_rows());
  double mse_forest = 0.0, mse_mean = 0.0;
  double lo = 1e300, hi = -1e300;
  for (double y : train.targets()) {
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    const double pred = model.predict(std::vector<double>{test.at(i, 0)});
    ASSERT_GE(pred, lo);
    ASSERT_LE(pred, hi);
    mse_forest += (pred - test.target(i)) * (pred - test.target(i));
    mse_mean += (mean - test.target(i)) * (mean - test.target(i));
  }
  EXPECT_LT(mse_forest, 0.05 * mse_mean);
}

TEST(FitForest, WorkerCountDoesNotChangeModel) {
  const auto d = parabola(300, 4);
  const ForestParams p{16, 10, 2, MtryRule::kAuto, true};
  const auto one = fit_forest(d, p, Task::kRegression, 12, 1);
  const auto four = fit_forest(d, p, Task::kRegression, 12, 4);
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, fit_forest(d, p, Task::kRegression, 12, 3));
  EXPECT_NE(one, fit_forest(d, p, Task::kRegression, 13, 1));
}

TEST(FitForest, ClassificationScoresInUnitInterval) {
  std::mt19937_64 gen(8);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 300; ++i) {
    rows.push_back({static_cast<double>(gen() % 100), static_cast<double>(gen() % 7)});
    y.push_back(static_cast<double>(gen() % 2));
  }
  const auto d = Dataset::from_rows(rows, y);
  const auto m = fit_forest(d, {20, 8, 1, MtryRule::kAuto, true},
                            Task::kClassification, 3);
  for (const auto& r : rows) {
    const double s = m.predict(r);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
  }
}

TEST(Predict, TreeOrderDoesNotMatterAndBatchIsExact) {
  const auto d = parabola(200, 6);
  const auto m = fit_forest(d, {9, 6, 2, MtryRule::kAuto, true}, Task::kRegression, 1);
  auto trees = m.trees();
  std::reverse(trees.begin(), trees.end());
  const ForestModel reversed(m.task(), m.n_features(), m.params(), m.seed(), trees);
  std::vector<double> rows, out(50);
  for (int i = 0; i < 50; ++i) rows.push_back(-3.0 + 0.12 * i);
  m.predict_batch(rows, out);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x{rows[i]};
    EXPECT_NEAR(reversed.predict(x), m.predict(x), 1e-12);
    EXPECT_EQ(out[i], m.predict(x));
  }
  std::vector<double> bad(3);
  EXPECT_THROW(m.predict_batch(rows, bad), UsageError);
}

TEST(Predict, RejectsBadInput) {
  const auto d = parabola(20, 6);
  const auto m = fit_forest(d, {2, 4, 2, MtryRule::kAuto, true}, Task::kRegression, 1);
  EXPECT_THROW(m.predict(std::vector<double>{1.0, 2.0}), UsageError);
  EXPECT_THROW(m.predict(std::vector<double>{std::nan("")}), UsageError);
}

TEST(Serialization, RoundTripIsBitExact) {
  const auto d = parabola(200, 9);
  const auto m = fit_forest(d, {7, 8, 2, MtryRule::kThird, true}, Task::kRegression, 77);
  std::stringstream buf;
  write_forest(m, buf);
  const auto back = read_forest(buf);
  EXPECT_EQ(back, m);
  testing::TempDir dir;
  save_forest(m, dir / "m.forest");
  EXPECT_EQ(load_forest(dir / "m.forest"), m);
}

TEST(Serialization, CorruptInputIsAnError) {
  std::stringstream junk("medlens-forest 99\n");
  EXPECT_THROW(read_forest(junk), DataError);
  std::stringstream empty;
  EXPECT_THROW(read_forest(empty), DataError);
}

}  // namespace
}  // namespace medlens::forest
