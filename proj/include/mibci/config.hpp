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

#ifndef MIBCI_CONFIG_HPP
#define MIBCI_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mibci/live.hpp"
#include "mibci/train.hpp"

namespace mibci::config {

// Plain-text `section.key = value` configuration with CLI `--set key=value`
// overrides applied on top.
class KeyValueFile {
 public:
  static KeyValueFile load(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides);
  static KeyValueFile from_string(std::string_view text,
                                  const std::vector<std::string>& overrides = {});

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;

  // Keys that were present but never read; used to reject typos.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> read_;
};

struct RunConfig {
  // dataset
  std::filesystem::path manifest_path;
  std::filesystem::path cache_dir = "cache";
  std::vector<std::string> subjects;
  std::vector<std::string> runs;
  double test_fraction = 0.1;
  std::vector<std::string> classes = {"T0", "T1", "T2"};
  std::uint64_t split_seed = 0;

  // dsp
  live::DspParams dsp;
  std::filesystem::path scout_file;  // empty: built-in scouts
  std::string scout_name = "R5";

  // model
  std::uint64_t model_seed = 0;
  std::vector<std::string> arch_tokens;  // empty: default architecture

  // train
  train::TrainConfig train;

  // paths
  std::filesystem::path out_dir = "out";

  std::filesystem::path model_path() const { return out_dir / "model.mibc"; }
  std::filesystem::path curve_path() const { return out_dir / "curve.csv"; }
  std::filesystem::path split_meta_path() const { return out_dir / "split_meta.txt"; }
  std::filesystem::path epochs_path(const std::string& subject,
                                    const std::string& run) const {
    return out_dir / "epochs" / (subject + "_" + run + ".epochs");
  }
};

// Loads and eagerly validates a run configuration. The MIBCI_CACHE
// environment variable overrides dataset.cache_dir. Field problems raise
// Error("ConfigError", "<field>: <reason>").
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides);
RunConfig run_config_from_string(std::string_view text,
                                 const std::vector<std::string>& overrides = {});

}  // namespace mibci::config

#endif  // MIBCI_CONFIG_HPP
