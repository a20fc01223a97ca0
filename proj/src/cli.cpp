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

#include "mibci/cli.hpp"

#include <algorithm>
#include <iostream>

#include "mibci/edf.hpp"
#include "mibci/live.hpp"
#include "mibci/util.hpp"

namespace mibci::cli {
namespace {

constexpr std::string_view kEpochMagic = "MIEP";

void require_artifact(const std::filesystem::path& path, const char* produced_by) {
  if (!std::filesystem::exists(path)) {
    fail("MissingArtifact",
         path.string() + " (run `" + produced_by + "` first)");
  }
}

std::vector<std::pair<std::string, std::string>> subject_run_pairs(
    const config::RunConfig& cfg) {
  if (cfg.subjects.empty()) fail("ConfigError", "dataset.subjects: empty");
  if (cfg.runs.empty()) fail("ConfigError", "dataset.runs: empty");
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const std::string& s : cfg.subjects) {
    for (const std::string& r : cfg.runs) pairs.emplace_back(s, r);
  }
  return pairs;
}

edf::Recording fetch_and_parse(const config::RunConfig& cfg,
                               fetch::Transport& transport,
                               const std::string& subject,
                               const std::string& run) {
  if (cfg.manifest_path.empty()) {
    fail("ConfigError", "dataset.manifest: required for this command");
  }
  const auto manifest = fetch::DatasetManifest::load(cfg.manifest_path);
  const std::string bytes =
      fetch::fetch_run(manifest, subject, run, cfg.cache_dir, transport);
  edf::Recording rec = edf::parse_edf(bytes);
  rec.subject_id = subject;
  rec.run_id = run;
  return rec;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

void write_epoch_archive(const std::filesystem::path& path,
                         const std::vector<dsp::Epoch>& epochs,
                         double sample_rate_hz) {
  BinaryWriter w;
  w.bytes(kEpochMagic);
  w.u16(1);
  w.f64(sample_rate_hz);
  w.u32(static_cast<std::uint32_t>(epochs.size()));
  for (const dsp::Epoch& e : epochs) {
    w.str(e.source.subject);
    w.str(e.source.run);
    w.f64(e.source.onset_s);
    w.str(e.label);
    w.u64(static_cast<std::uint64_t>(e.samples.size()));
    for (Eigen::Index i = 0; i < e.samples.size(); ++i) w.f64(e.samples[i]);
  }
  atomic_write_file(path, w.data());
}

EpochArchive read_epoch_archive(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  BinaryReader r(bytes);
  if (r.bytes(4) != kEpochMagic) fail("BadMagic", path.string());
  if (r.u16() != 1) fail("VersionMismatch", path.string());
  EpochArchive archive;
  archive.sample_rate_hz = r.f64();
  const std::uint32_t n = r.u32();
  archive.epochs.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    dsp::Epoch& e = archive.epochs[i];
    e.source.subject = r.str();
    e.source.run = r.str();
    e.source.onset_s = r.f64();
    e.label = r.str();
    e.sample_rate_hz = archive.sample_rate_hz;
    const std::uint64_t len = r.u64();
    e.samples.resize(static_cast<Eigen::Index>(len));
    for (std::uint64_t k = 0; k < len; ++k) {
      e.samples[static_cast<Eigen::Index>(k)] = r.f64();
    }
  }
  return archive;
}

void write_split_meta(const std::filesystem::path& path, const SplitMeta& meta) {
  std::string out;
  out += "rows = " + std::to_string(meta.rows) + "\n";
  out += "cols = " + std::to_string(meta.cols) + "\n";
  out += "classes = " + join(meta.class_names, ',') + "\n";
  out += "seed = " + std::to_string(meta.seed) + "\n";
  std::vector<std::string> mean, stddev;
  for (Eigen::Index i = 0; i < meta.norm_stats.mean.size(); ++i) {
    mean.push_back(format_double(meta.norm_stats.mean[i]));
    stddev.push_back(format_double(meta.norm_stats.stddev[i]));
  }
  out += "norm_mean = " + join(mean, ',') + "\n";
  out += "norm_std = " + join(stddev, ',') + "\n";
  atomic_write_file(path, out);
}

SplitMeta read_split_meta(const std::filesystem::path& path) {
  const auto kv = config::KeyValueFile::from_string(read_file(path));
  SplitMeta meta;
  meta.rows = static_cast<int>(kv.get_int("rows", 0));
  meta.cols = static_cast<int>(kv.get_int("cols", 0));
  for (const std::string& name : split(kv.get_string("classes", ""), ',')) {
    if (!trim(name).empty()) meta.class_names.emplace_back(trim(name));
  }
  meta.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  const auto parse_row = [&](const char* key) {
    std::vector<double> values;
    for (const std::string& field : split(kv.get_string(key, ""), ',')) {
      if (!trim(field).empty()) values.push_back(parse_double(trim(field)));
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
    return v;
  };
  meta.norm_stats.mean = parse_row("norm_mean");
  meta.norm_stats.stddev = parse_row("norm_std");
  if (meta.rows <= 0 || meta.cols <= 0 || meta.class_names.empty()) {
    fail("ParseError", path.string() + ": incomplete split metadata");
  }
  return meta;
}

dsp::ScoutSpec resolve_scout(const config::RunConfig& cfg) {
  const std::vector<dsp::ScoutSpec> scouts =
      cfg.scout_file.empty() ? dsp::default_scouts()
                             : dsp::load_scout_file(cfg.scout_file);
  return dsp::find_scout(scouts, cfg.scout_name);
}

int cmd_fetch(const config::RunConfig& cfg, fetch::Transport& transport) {
  if (cfg.manifest_path.empty()) {
    fail("ConfigError", "dataset.manifest: required for fetch");
  }
  const auto manifest = fetch::DatasetManifest::load(cfg.manifest_path);
  for (const auto& [subject, run] : subject_run_pairs(cfg)) {
    const std::string bytes =
        fetch::fetch_run(manifest, subject, run, cfg.cache_dir, transport);
    std::cout << "fetched subject=" << subject << " run=" << run
              << " bytes=" << bytes.size() << "\n";
  }
  return 0;
}

int cmd_preprocess(const config::RunConfig& cfg, fetch::Transport& transport) {
  const dsp::ScoutSpec scout = resolve_scout(cfg);
  for (const auto& [subject, run] : subject_run_pairs(cfg)) {
    const edf::Recording rec = fetch_and_parse(cfg, transport, subject, run);
    const Eigen::VectorXd series = dsp::scout_project(rec, scout);
    const dsp::EpochBatch batch = dsp::epoch_by_annotations(
        rec, series, cfg.dsp.window_s, cfg.dsp.offset_s);
    write_epoch_archive(cfg.epochs_path(subject, run), batch.epochs,
                        rec.sample_rate_hz);
    std::cout << "preprocessed subject=" << subject << " run=" << run
              << " epochs=" << batch.epochs.size()
              << " skipped=" << batch.skipped
              << " ignored_annotations=" << rec.ignored_annotations << "\n";
  }
  return 0;
}

int cmd_build_dataset(const config::RunConfig& cfg) {
  std::vector<data::LabeledSample> samples;
  for (const auto& [subject, run] : subject_run_pairs(cfg)) {
    const std::filesystem::path archive_path = cfg.epochs_path(subject, run);
    require_artifact(archive_path, "preprocess");
    const EpochArchive archive = read_epoch_archive(archive_path);
    for (const dsp::Epoch& e : archive.epochs) {
      if (std::find(cfg.classes.begin(), cfg.classes.end(), e.label) ==
          cfg.classes.end()) {
        continue;
      }
      const Eigen::VectorXd filtered =
          dsp::bandpass(e.samples, cfg.dsp.filter, e.sample_rate_hz);
      const dsp::TfrImage tfr = dsp::morlet_tfr(
          filtered, e.sample_rate_hz, cfg.dsp.morlet, cfg.dsp.time_bins);
      data::LabeledSample s;
      s.image = tfr.power;
      s.label_name = e.label;
      s.source = e.source;
      samples.push_back(std::move(s));
    }
  }
  const data::DatasetSplit split =
      data::build_split(samples, cfg.test_fraction, cfg.split_seed);
  data::export_csv(split, cfg.out_dir);

  SplitMeta meta;
  meta.rows = static_cast<int>(split.train.front().image.rows());
  meta.cols = static_cast<int>(split.train.front().image.cols());
  meta.class_names = split.class_names;
  meta.seed = split.seed;
  meta.norm_stats = split.norm_stats;
  write_split_meta(cfg.split_meta_path(), meta);

  std::cout << "dataset train=" << split.train.size()
            << " test=" << split.test.size()
            << " classes=" << join(split.class_names, ',') << "\n";
  return 0;
}

int cmd_train(const config::RunConfig& cfg) {
  require_artifact(cfg.split_meta_path(), "build-dataset");
  require_artifact(cfg.out_dir / "train_data.csv", "build-dataset");
  const SplitMeta meta = read_split_meta(cfg.split_meta_path());
  data::DatasetSplit split =
      data::import_csv(cfg.out_dir, meta.rows, meta.cols, meta.class_names);
  split.norm_stats = meta.norm_stats;
  split.seed = meta.seed;

  const std::vector<int> input_dims = {1, meta.rows, meta.cols};
  const std::vector<nn::LayerSpec> layers =
      cfg.arch_tokens.empty()
          ? nn::default_architecture(input_dims,
                                     static_cast<int>(meta.class_names.size()))
          : nn::parse_architecture(cfg.arch_tokens);
  nn::Model<double> model = nn::init_params<double>(
      layers, input_dims, meta.class_names, cfg.model_seed);
  model.norm_stats = meta.norm_stats;

  const train::TrainResult result =
      train::train(model, split, cfg.train, &std::cout);
  nn::save_model(result.model, cfg.model_path());
  train::emit_curve_csv(result.curve, cfg.curve_path());
  std::cout << "saved model=" << cfg.model_path().string()
            << " curve=" << cfg.curve_path().string() << "\n";
  return 0;
}

int cmd_eval(const config::RunConfig& cfg,
             const std::filesystem::path& model_path) {
  const std::filesystem::path path =
      model_path.empty() ? cfg.model_path() : model_path;
  require_artifact(path, "train");
  require_artifact(cfg.split_meta_path(), "build-dataset");
  const nn::Model<double> model = nn::load_model(path);
  const SplitMeta meta = read_split_meta(cfg.split_meta_path());
  const data::DatasetSplit split =
      data::import_csv(cfg.out_dir, meta.rows, meta.cols, meta.class_names);

  const train::EvalReport report = train::evaluate(model, split.test);
  const std::string text = train::format_eval_report(report, meta.class_names);
  atomic_write_file(cfg.out_dir / "eval_report.txt", text);
  atomic_write_file(cfg.out_dir / "eval_report.csv",
                    train::eval_report_to_csv(report, meta.class_names));
  std::cout << text;
  return 0;
}

int cmd_infer_live(const config::RunConfig& cfg,
                   const std::filesystem::path& model_path,
                   const std::string& subject, const std::string& run,
                   fetch::Transport& transport) {
  const std::filesystem::path path =
      model_path.empty() ? cfg.model_path() : model_path;
  require_artifact(path, "train");
  const nn::Model<double> model = nn::load_model(path);

  const std::string chosen_subject =
      !subject.empty() ? subject
                       : (cfg.subjects.empty() ? "" : cfg.subjects.front());
  const std::string chosen_run =
      !run.empty() ? run : (cfg.runs.empty() ? "" : cfg.runs.front());
  if (chosen_subject.empty() || chosen_run.empty()) {
    fail("ConfigError", "dataset.subjects/dataset.runs: no run to replay");
  }

  const edf::Recording rec =
      fetch_and_parse(cfg, transport, chosen_subject, chosen_run);
  const dsp::ScoutSpec scout = resolve_scout(cfg);
  const live::SessionReport report =
      live::run_session(model, rec, scout, cfg.dsp);

  const std::string text = live::format_session_report(report);
  atomic_write_file(cfg.out_dir / "session_report.txt", text);
  atomic_write_file(cfg.out_dir / "session_report.csv",
                    live::session_report_to_csv(report));
  std::cout << text;
  return 0;
}

}  // namespace mibci::cli
