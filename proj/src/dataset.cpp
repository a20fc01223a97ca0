// Copyright 2026 The MIBCI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mibci/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mibci/errors.hpp"
#include "mibci/rng.hpp"
#include "mibci/util.hpp"

namespace mibci::data {
namespace {

std::string source_key(const dsp::SampleSource& s) {
  return s.subject + "/" + s.run + "/" + format_double(s.onset_s);
}

void assert_disjoint_sources(const DatasetSplit& split) {
  std::set<std::string> train_keys;
  bool have_sources = false;
  for (const LabeledSample& s : split.train) {
    if (s.source.subject.empty() && s.source.run.empty()) continue;
    have_sources = true;
    train_keys.insert(source_key(s.source));
  }
  if (!have_sources) return;
  for (const LabeledSample& s : split.test) {
    if (train_keys.count(source_key(s.source))) {
      fail("InvalidSpec",
           "source " + source_key(s.source) + " appears in train and test");
    }
  }
}

dsp::NormStats row_stats(const std::vector<LabeledSample>& samples) {
  const Eigen::Index rows = samples.front().image.rows();
  dsp::NormStats stats;
  stats.mean = Eigen::VectorXd::Zero(rows);
  stats.stddev = Eigen::VectorXd::Zero(rows);
  double count = 0.0;
  for (const LabeledSample& s : samples) {
    stats.mean += s.image.rowwise().sum();
    count += static_cast<double>(s.image.cols());
  }
  stats.mean /= count;
  for (const LabeledSample& s : samples) {
    stats.stddev +=
        (s.image.colwise() - stats.mean).array().square().matrix().rowwise().sum();
  }
  stats.stddev = (stats.stddev / count).cwiseSqrt();
  return stats;
}

void apply_norm(std::vector<LabeledSample>& samples, const dsp::NormStats& stats) {
  for (LabeledSample& s : samples) {
    for (Eigen::Index r = 0; r < s.image.rows(); ++r) {
      const double sd = stats.stddev[r] > 0.0 ? stats.stddev[r] : 1.0;
      s.image.row(r) = (s.image.row(r).array() - stats.mean[r]) / sd;
    }
  }
}

}  // namespace

int class_index(const std::vector<std::string>& class_names,
                const std::string& label_name) {
  const auto it = std::find(class_names.begin(), class_names.end(), label_name);
  if (it == class_names.end()) {
    fail("LabelOutOfRange", "unknown class name " + label_name);
  }
  return static_cast<int>(it - class_names.begin());
}

DatasetSplit build_split(const std::vector<LabeledSample>& samples,
                         double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail("InvalidSpec", "test_fraction must lie in (0, 1)");
  }

  // Canonical class order: sorted label names (T0 < T1 < T2).
  std::set<std::string> names;
  for (const LabeledSample& s : samples) names.insert(s.label_name);
  DatasetSplit split;
  split.class_names.assign(names.begin(), names.end());
  split.seed = seed;

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i : order) by_class[samples[i].label_name].push_back(i);

  for (const auto& [name, members] : by_class) {
    if (members.size() < 2) {
      fail("ClassTooSmall", "class " + name + " has " +
                                std::to_string(members.size()) +
                                " samples; need at least 2");
    }
    std::size_t n_test = static_cast<std::size_t>(
        std::llround(static_cast<double>(members.size()) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    for (std::size_t i = 0; i < members.size(); ++i) {
      LabeledSample s = samples[members[i]];
      s.label = class_index(split.class_names, s.label_name);
      (i < n_test ? split.test : split.train).push_back(std::move(s));
    }
  }

  split.norm_stats = row_stats(split.train);
  apply_norm(split.train, split.norm_stats);
  apply_norm(split.test, split.norm_stats);
  assert_disjoint_sources(split);
  return split;
}

namespace {

void write_samples(const std::vector<LabeledSample>& samples,
                   const std::filesystem::path& data_path,
                   const std::filesystem::path& labels_path) {
  std::string data, labels;
  for (const LabeledSample& s : samples) {
    for (Eigen::Index r = 0; r < s.image.rows(); ++r) {
      for (Eigen::Index c = 0; c < s.image.cols(); ++c) {
        if (r != 0 || c != 0) data += ',';
        data += format_double(s.image(r, c));
      }
    }
    data += '\n';
    labels += std::to_string(s.label);
    labels += '\n';
  }
  atomic_write_file(data_path, data);
  atomic_write_file(labels_path, labels);
}

std::vector<LabeledSample> read_samples(const std::filesystem::path& data_path,
                                        const std::filesystem::path& labels_path,
                                        int rows, int cols,
                                        const std::vector<std::string>& class_names) {
  const std::vector<std::string> data_lines = split(read_file(data_path), '\n');
  const std::vector<std::string> label_lines = split(read_file(labels_path), '\n');

  const auto non_empty = [](const std::vector<std::string>& lines) {
    std::size_t n = lines.size();
    while (n > 0 && trim(lines[n - 1]).empty()) --n;
    return n;
  };
  const std::size_t n_data = non_empty(data_lines);
  const std::size_t n_labels = non_empty(label_lines);
  if (n_data != n_labels) {
    fail("ShapeMismatch", data_path.string() + " has " + std::to_string(n_data) +
                              " rows but labels file has " +
                              std::to_string(n_labels));
  }

  std::vector<LabeledSample> out;
  out.reserve(n_data);
  for (std::size_t i = 0; i < n_data; ++i) {
    const std::vector<std::string> fields = split(data_lines[i], ',');
    if (fields.size() != static_cast<std::size_t>(rows) * cols) {
      fail("ShapeMismatch", data_path.string() + " line " + std::to_string(i + 1) +
                                ": " + std::to_string(fields.size()) +
                                " fields, expected " + std::to_string(rows * cols));
    }
    LabeledSample s;
    s.image.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        try {
          s.image(r, c) = parse_double(fields[r * cols + c]);
        } catch (const Error&) {
          fail("ParseError", data_path.string() + " line " +
                                 std::to_string(i + 1) + ": bad number '" +
                                 fields[r * cols + c] + "'");
        }
      }
    }
    long label = 0;
    try {
      label = parse_int(trim(label_lines[i]));
    } catch (const Error&) {
      fail("ParseError", labels_path.string() + " line " +
                             std::to_string(i + 1) + ": bad label");
    }
    if (label < 0 || label >= static_cast<long>(class_names.size())) {
      fail("LabelOutOfRange", labels_path.string() + " line " +
                                  std::to_string(i + 1) + ": label " +
                                  std::to_string(label) + " with " +
                                  std::to_string(class_names.size()) + " classes");
    }
    s.label = static_cast<int>(label);
    s.label_name = class_names[s.label];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void export_csv(const DatasetSplit& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_samples(split.train, dir / "train_data.csv", dir / "train_labels.csv");
  write_samples(split.test, dir / "test_data.csv", dir / "test_labels.csv");
}

DatasetSplit import_csv(const std::filesystem::path& dir, int rows, int cols,
                        const std::vector<std::string>& class_names) {
  DatasetSplit split;
  split.class_names = class_names;
  split.train = read_samples(dir / "train_data.csv", dir / "train_labels.csv",
                             rows, cols, class_names);
  split.test = read_samples(dir / "test_data.csv", dir / "test_labels.csv",
                            rows, cols, class_names);
  return split;
}

}  // namespace mibci::data
