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

#ifndef MIBCI_DATASET_HPP
#define MIBCI_DATASET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mibci/dsp.hpp"

namespace mibci::data {

struct LabeledSample {
  Eigen::MatrixXd image;  // freqs x time_bins
  int label = 0;
  std::string label_name;  // T0/T1/T2
  dsp::SampleSource source;
};

struct DatasetSplit {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
  std::vector<std::string> class_names;  // index -> name
  dsp::NormStats norm_stats;             // from train images, pre-normalization
  std::uint64_t seed = 0;
};

// Stratified deterministic split. Input images are raw TFR power; output
// images are standardized with statistics computed on the training half
// only. Each class contributes round(n_c * test_fraction) test samples,
// floored at 1. Throws: ClassTooSmall, InvalidSpec.
DatasetSplit build_split(const std::vector<LabeledSample>& samples,
                         double test_fraction, std::uint64_t seed);

// Four-file CSV interchange: train_data.csv / train_labels.csv /
// test_data.csv / test_labels.csv. Data rows are row-major flattened
// images; numbers use round-trip-exact decimal formatting. Throws: IoError.
void export_csv(const DatasetSplit& split, const std::filesystem::path& dir);

// Inverse of export_csv (sources and norm stats are not part of the CSV
// interchange). Throws: ShapeMismatch, LabelOutOfRange, ParseError, IoError.
DatasetSplit import_csv(const std::filesystem::path& dir, int rows, int cols,
                        const std::vector<std::string>& class_names);

// Index of a label name in class_names; throws LabelOutOfRange if absent.
int class_index(const std::vector<std::string>& class_names,
                const std::string& label_name);

}  // namespace mibci::data

#endif  // MIBCI_DATASET_HPP
