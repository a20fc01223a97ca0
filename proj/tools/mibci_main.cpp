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

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mibci/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Motor-imagery EEG classification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string model_path;
  std::string subject;
  std::string run;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration file")
        ->required();
    cmd->add_option("--set", overrides,
                    "Override a configuration key (key=value), repeatable");
    return cmd;
  };

  CLI::App* fetch = add_common(app.add_subcommand(
      "fetch", "Download and verify the runs listed in the configuration"));
  CLI::App* preprocess = add_common(app.add_subcommand(
      "preprocess", "Fetch, parse, scout-project and epoch each run"));
  CLI::App* build = add_common(app.add_subcommand(
      "build-dataset", "Turn epoch archives into a stratified CSV dataset"));
  CLI::App* train = add_common(
      app.add_subcommand("train", "Train the classifier on the CSV dataset"));
  CLI::App* eval = add_common(app.add_subcommand(
      "eval", "Evaluate a saved model on the held-out test split"));
  eval->add_option("--model", model_path, "Model file (default: out/model.mibc)");
  CLI::App* live = add_common(app.add_subcommand(
      "infer-live", "Replay a recording through the model as a live stream"));
  live->add_option("--model", model_path, "Model file (default: out/model.mibc)");
  live->add_option("--subject", subject, "Subject to replay (default: first)");
  live->add_option("--run", run, "Run to replay (default: first)");

  CLI11_PARSE(app, argc, argv);

  try {
    const mibci::config::RunConfig cfg =
        mibci::config::load_run_config(config_path, overrides);
    mibci::fetch::AutoTransport transport;
    if (fetch->parsed()) return mibci::cli::cmd_fetch(cfg, transport);
    if (preprocess->parsed()) return mibci::cli::cmd_preprocess(cfg, transport);
    if (build->parsed()) return mibci::cli::cmd_build_dataset(cfg);
    if (train->parsed()) return mibci::cli::cmd_train(cfg);
    if (eval->parsed()) return mibci::cli::cmd_eval(cfg, model_path);
    if (live->parsed()) {
      return mibci::cli::cmd_infer_live(cfg, model_path, subject, run,
                                        transport);
    }
  } catch (const mibci::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable: require_subcommand(1)
}
