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

#ifndef MIBCI_CLI_HPP
#define MIBCI_CLI_HPP

#include "mibci/config.hpp"
#include "mibci/fetch.hpp"

namespace mibci::cli {

// Per-run epoch archive (binary, magic MIEP): the output of `preprocess`
// and the input of `build-dataset`.
void write_epoch_archive(const std::filesystem::path& path,
                         const std::vector<dsp::Epoch>& epochs,
                         double sample_rate_hz);
struct EpochArchive {
  std::vector<dsp::Epoch> epochs;
  double sample_rate_hz = 0.0;
};
EpochArchive read_epoch_archive(const std::filesystem::path& path);

// Split sidecar (rows/cols, class names, seed, normalization stats) written
// next to the four CSV files.
struct SplitMeta {
  int rows = 0;
  int cols = 0;
  std::vector<std::string> class_names;
  std::uint64_t seed = 0;
  dsp::NormStats norm_stats;
};
void write_split_meta(const std::filesystem::path& path, const SplitMeta& meta);
SplitMeta read_split_meta(const std::filesystem::path& path);

// Scouts from cfg.scout_file, or the built-in set when unset.
dsp::ScoutSpec resolve_scout(const config::RunConfig& cfg);

// Subcommands. All return 0 on success and report failures by throwing
// Error; outputs are written atomically so reruns are idempotent.
int cmd_fetch(const config::RunConfig& cfg, fetch::Transport& transport);
int cmd_preprocess(const config::RunConfig& cfg, fetch::Transport& transport);
int cmd_build_dataset(const config::RunConfig& cfg);
int cmd_train(const config::RunConfig& cfg);
int cmd_eval(const config::RunConfig& cfg, const std::filesystem::path& model_path);
int cmd_infer_live(const config::RunConfig& cfg,
                   const std::filesystem::path& model_path,
                   const std::string& subject, const std::string& run,
                   fetch::Transport& transport);

}  // namespace mibci::cli

#endif  // MIBCI_CLI_HPP
