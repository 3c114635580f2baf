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

// Forest file format, version 1. Plain text, one record per line:
//
//   medlens-forest 1
//   task <regression|classification>
//   n_features <p>
//   seed <root seed>
//   params <n_trees> <max_depth> <min_leaf> <mtry rule> <bootstrap 0|1>
//   trees <count>
//   tree <index> <node count>
//   <feature> <threshold> <left> <right> <value> <n_samples>   (per node)
//   ...
//   end
//
// Nodes are listed in storage order (root first, depth-first, left before
// right). Leaves have feature -1, children -1 and threshold 0. Reals are
// shortest round-trip decimals.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "medlens/error.h"
#include "medlens/forest.h"

namespace medlens::forest {
namespace {

constexpr std::string_view kMagic = "medlens-forest";
constexpr int kVersion = 1;

std::string real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& token) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw DataError("forest file: bad real '" + token + "'");
  }
  return v;
}

void expect(std::istream& in, std::string_view keyword) {
  std::string token;
  if (!(in >> token) || token != keyword) {
    throw DataError("forest file: expected '" + std::string(keyword) +
                    "', got '" + token + "'");
  }
}

template <typename T>
T read_value(std::istream& in, std::string_view what) {
  T v{};
  if (!(in >> v)) throw DataError("forest file: cannot read " + std::string(what));
  return v;
}

}  // namespace

void write_forest(const ForestModel& model, std::ostream& out) {
  const auto& p = model.params();
  out << kMagic << ' ' << kVersion << '\n';
  out << "task "
      << (model.task() == Task::kRegression ? "regression" : "classification")
      << '\n';
  out << "n_features " << model.n_features() << '\n';
  out << "seed " << model.seed() << '\n';
  out << "params " << p.n_trees << ' ' << p.max_depth << ' ' << p.min_leaf
      << ' ' << to_string(p.mtry_rule) << ' ' << (p.bootstrap ? 1 : 0) << '\n';
  out << "trees " << model.trees().size() << '\n';
  std::string line;
  for (std::size_t t = 0; t < model.trees().size(); ++t) {
    const auto& nodes = model.trees()[t].nodes;
    out << "tree " << t << ' ' << nodes.size() << '\n';
    for (const auto& n : nodes) {
      line.clear();
      line += std::to_string(n.feature);
      line += ' ';
      line += real(n.threshold);
      line += ' ';
      line += std::to_string(n.left);
      line += ' ';
      line += std::to_string(n.right);
      line += ' ';
      line += real(n.value);
      line += ' ';
      line += std::to_string(n.n_samples);
      line += '\n';
      out << line;
    }
  }
  out << "end\n";
}

ForestModel read_forest(std::istream& in) {
  expect(in, kMagic);
  const int version = read_value<int>(in, "version");
  if (version != kVersion) {
    throw DataError("forest file: unsupported version " +
                    std::to_string(version));
  }
  expect(in, "task");
  const auto task_name = read_value<std::string>(in, "task");
  Task task;
  if (task_name == "regression") task = Task::kRegression;
  else if (task_name == "classification") task = Task::kClassification;
  else throw DataError("forest file: unknown task '" + task_name + "'");

  expect(in, "n_features");
  const auto n_features = read_value<std::size_t>(in, "n_features");
  expect(in, "seed");
  const auto seed = read_value<std::uint64_t>(in, "seed");
  expect(in, "params");
  ForestParams params;
  params.n_trees = read_value<std::size_t>(in, "n_trees");
  params.max_depth = read_value<std::size_t>(in, "max_depth");
  params.min_leaf = read_value<std::size_t>(in, "min_leaf");
  try {
    params.mtry_rule = parse_mtry_rule(read_value<std::string>(in, "mtry"));
  } catch (const UsageError& e) {
    throw DataError(std::string("forest file: ") + e.what());
  }
  params.bootstrap = read_value<int>(in, "bootstrap") != 0;

  expect(in, "trees");
  const auto n_trees = read_value<std::size_t>(in, "tree count");
  std::vector<Tree> trees(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    expect(in, "tree");
    if (read_value<std::size_t>(in, "tree index") != t) {
      throw DataError("forest file: trees out of order");
    }
    const auto n_nodes = read_value<std::size_t>(in, "node count");
    if (n_nodes == 0) throw DataError("forest file: empty tree");
    auto& nodes = trees[t].nodes;
    nodes.resize(n_nodes);
    for (auto& n : nodes) {
      n.feature = read_value<std::int32_t>(in, "feature");
      n.threshold = parse_real(read_value<std::string>(in, "threshold"));
      n.left = read_value<std::int32_t>(in, "left");
      n.right = read_value<std::int32_t>(in, "right");
      n.value = parse_real(read_value<std::string>(in, "value"));
      n.n_samples = read_value<std::uint32_t>(in, "n_samples");
    }
    for (const auto& n : nodes) {
      if (n.is_leaf()) continue;
      const auto limit = static_cast<std::int32_t>(n_nodes);
      if (n.left <= 0 || n.right <= 0 || n.left >= limit || n.right >= limit ||
          static_cast<std::size_t>(n.feature) >= n_features) {
        throw DataError("forest file: malformed node in tree " +
                        std::to_string(t));
      }
    }
  }
  expect(in, "end");
  return ForestModel(task, n_features, params, seed, std::move(trees));
}

void save_forest(const ForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  write_forest(model, out);
  if (!out) throw UsageError("write failed: " + path.string());
}

ForestModel load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_forest(in);
}

}  // namespace medlens::forest
