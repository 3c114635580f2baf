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

// pipeline.txt, version 1:
//
//   medlens-pipeline 1
//   hours <H>
//   threshold <real>
//   window <W>
//   variation <range|variance>
//   max_train <n>
//   signs <K>
//   <sign id>        (K lines, in feature order)
//   end

#include <charconv>
#include <fstream>
#include <string>

#include "medlens/error.h"
#include "medlens/evaluate.h"
#include "medlens/ingest.h"

namespace medlens::eval {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kMagic = "medlens-pipeline 1";

std::string interp_file(std::size_t k) {
  std::string digits = std::to_string(k);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "interp_" + digits + ".forest";
}

std::string next_line(std::istream& in, const fs::path& path) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("'" + path.string() + "' ends early");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string field(std::istream& in, const fs::path& path,
                  std::string_view key) {
  const auto line = next_line(in, path);
  if (line.size() <= key.size() || line.compare(0, key.size(), key) != 0 ||
      line[key.size()] != ' ') {
    throw DataError("'" + path.string() + "': expected '" + std::string(key) +
                    "'");
  }
  return line.substr(key.size() + 1);
}

template <typename T>
T number(const std::string& text, const fs::path& path) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError("'" + path.string() + "': bad number '" + text + "'");
  }
  return v;
}

}  // namespace

void save_pipeline(const TrainedPipeline& pipeline, const fs::path& dir) {
  const auto& models = pipeline.interpolators;
  if (models.models.size() != models.sign_ids.size() ||
      models.sign_ids != pipeline.signs) {
    throw InvariantError("pipeline interpolators do not match its signs");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create '" + dir.string() + "'");

  auto out = ingest::open_output(dir / "pipeline.txt");
  out << kMagic << '\n';
  out << "hours " << pipeline.hours << '\n';
  out << "threshold " << ingest::format_double(pipeline.threshold) << '\n';
  out << "window " << models.options.window << '\n';
  out << "variation " << to_string(models.options.variation) << '\n';
  out << "max_train " << models.options.max_train << '\n';
  out << "signs " << pipeline.signs.size() << '\n';
  for (const auto& s : pipeline.signs) {
    if (s.find('\n') != std::string::npos) {
      throw UsageError("sign id with a line break cannot be saved");
    }
    out << s << '\n';
  }
  out << "end\n";
  if (!out) throw UsageError("write failed: " + (dir / "pipeline.txt").string());

  for (std::size_t k = 0; k < models.models.size(); ++k) {
    forest::save_forest(models.models[k], dir / interp_file(k));
  }
  forest::save_forest(pipeline.classifier, dir / "classifier.forest");
}

TrainedPipeline load_pipeline(const fs::path& dir) {
  const auto path = dir / "pipeline.txt";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  if (next_line(in, path) != kMagic) {
    throw DataError("'" + path.string() + "' is not a pipeline manifest");
  }
  TrainedPipeline p;
  p.hours = number<std::size_t>(field(in, path, "hours"), path);
  p.threshold = number<double>(field(in, path, "threshold"), path);
  auto& opts = p.interpolators.options;
  opts.window = number<std::size_t>(field(in, path, "window"), path);
  try {
    opts.variation = parse_variation(field(in, path, "variation"));
  } catch (const UsageError& e) {
    throw DataError("'" + path.string() + "': " + e.what());
  }
  opts.max_train = number<std::size_t>(field(in, path, "max_train"), path);
  const auto k = number<std::size_t>(field(in, path, "signs"), path);
  for (std::size_t i = 0; i < k; ++i) p.signs.push_back(next_line(in, path));
  if (next_line(in, path) != "end") {
    throw DataError("'" + path.string() + "': missing 'end'");
  }
  if (p.hours == 0 || k == 0) {
    throw DataError("'" + path.string() + "': empty pipeline");
  }

  p.interpolators.sign_ids = p.signs;
  for (std::size_t i = 0; i < k; ++i) {
    auto model = forest::load_forest(dir / interp_file(i));
    if (model.task() != forest::Task::kRegression ||
        model.n_features() != interp::kFeatureCount) {
      throw DataError("interpolator " + std::to_string(i) + " has wrong shape");
    }
    if (!model.params().n_trees || model.trees().empty()) {
      throw DataError("interpolator " + std::to_string(i) + " is empty");
    }
    opts.forest = model.params();
    p.interpolators.models.push_back(std::move(model));
  }
  p.classifier = forest::load_forest(dir / "classifier.forest");
  if (p.classifier.task() != forest::Task::kClassification ||
      p.classifier.n_features() != k * p.hours ||
      p.classifier.trees().empty()) {
    throw DataError("classifier does not match the pipeline manifest");
  }
  return p;
}

}  // namespace medlens::eval
