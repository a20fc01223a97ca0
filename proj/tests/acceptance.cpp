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

// End-to-end acceptance gate. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails. Criteria 5, 6 and
// 8 drive the installed `mibci` binary (path injected via MIBCI_CLI_PATH)
// against a locally generated synthetic recording set served over file://.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>

#include "mibci/cli.hpp"
#include "mibci/config.hpp"
#include "mibci/dataset.hpp"
#include "mibci/dsp.hpp"
#include "mibci/edf.hpp"
#include "mibci/fetch.hpp"
#include "mibci/live.hpp"
#include "mibci/model.hpp"
#include "mibci/rng.hpp"
#include "mibci/train.hpp"
#include "mibci/util.hpp"
#include "support/edf_writer.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace mibci;
using nn::Tensor;

namespace {

Tensor<double> random_tensor(std::vector<int> dims, Rng& rng) {
  Tensor<double> t(std::move(dims));
  for (Eigen::Index i = 0; i < t.size(); ++i) t.values[i] = rng.next_gauss();
  return t;
}

double max_rel_err(const Tensor<double>& a, const Tensor<double>& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max(1e-6, std::abs(a.values[i]) + std::abs(b.values[i]));
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / denom);
  }
  return worst;
}

// Central finite differences of `loss` against every element of `param`.
Tensor<double> fd_gradient(Tensor<double>& param,
                           const std::function<double()>& loss) {
  constexpr double h = 1e-6;
  Tensor<double> grad(param.dims);
  for (Eigen::Index i = 0; i < param.size(); ++i) {
    const double keep = param.values[i];
    param.values[i] = keep + h;
    const double up = loss();
    param.values[i] = keep - h;
    const double down = loss();
    param.values[i] = keep;
    grad.values[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// --- criterion 1: finite-difference gradient suite -------------------------

bool criterion_gradients() {
  Rng rng(101);
  int configs = 0;
  bool ok = true;

  for (int iter = 0; iter < 8; ++iter) {  // conv layers
    const int in_ch = 1 + static_cast<int>(rng.next_below(2));
    const int out_ch = 1 + static_cast<int>(rng.next_below(3));
    const int k = 1 + static_cast<int>(rng.next_below(3));
    const int stride = 1 + static_cast<int>(rng.next_below(2));
    const int pad = static_cast<int>(rng.next_below(2));
    Tensor<double> x = random_tensor({in_ch, k + 2, k + 3}, rng);
    Tensor<double> w = random_tensor({out_ch, in_ch, k, k}, rng);
    Tensor<double> b = random_tensor({out_ch}, rng);
    const Tensor<double> c =
        random_tensor(nn::conv2d_forward(x, w, b, stride, pad).dims, rng);
    const auto loss = [&] {
      return c.values.dot(nn::conv2d_forward(x, w, b, stride, pad).values);
    };
    const nn::Conv2dGrads<double> g = nn::conv2d_backward(x, w, c, stride, pad);
    ok = ok && max_rel_err(fd_gradient(w, loss), g.weights) < 1e-4 &&
         max_rel_err(fd_gradient(b, loss), g.bias) < 1e-4 &&
         max_rel_err(fd_gradient(x, loss), g.input) < 1e-4;
    ++configs;
  }

  for (int iter = 0; iter < 8; ++iter) {  // dense layers
    const int in = 2 + static_cast<int>(rng.next_below(8));
    const int out = 1 + static_cast<int>(rng.next_below(6));
    Tensor<double> x = random_tensor({in}, rng);
    Tensor<double> w = random_tensor({out, in}, rng);
    Tensor<double> b = random_tensor({out}, rng);
    const Tensor<double> c = random_tensor({out}, rng);
    const auto loss = [&] {
      return c.values.dot(nn::dense_forward(x, w, b).values);
    };
    const nn::DenseGrads<double> g = nn::dense_backward(x, w, c);
    ok = ok && max_rel_err(fd_gradient(w, loss), g.weights) < 1e-4 &&
         max_rel_err(fd_gradient(b, loss), g.bias) < 1e-4 &&
         max_rel_err(fd_gradient(x, loss), g.input) < 1e-4;
    ++configs;
  }

  for (int iter = 0; iter < 4; ++iter) {  // full stacks, cross-entropy loss
    nn::Model<double> m = nn::init_params<double>(
        {nn::Conv2dSpec{1, 2, 3, 1, 1}, nn::ReluSpec{}, nn::MaxPoolSpec{2, 2},
         nn::FlattenSpec{}, nn::DenseSpec{24, 3}, nn::SoftmaxSpec{}},
        {1, 6, 8}, {"T0", "T1", "T2"}, 300 + iter);
    const Tensor<double> image = random_tensor({1, 6, 8}, rng);
    const int label = static_cast<int>(rng.next_below(3));
    nn::ForwardCache<double> cache;
    nn::forward(m, image, nn::Mode::kEval, nullptr, &cache);
    const nn::Gradients<double> g = nn::backward(m, cache, label);
    const auto loss = [&] {
      return -std::log(nn::forward(m, image, nn::Mode::kEval).values[label]);
    };
    for (std::size_t li = 0; li < m.layers.size() && ok; ++li) {
      if (m.weights[li].empty()) continue;
      ok = ok && max_rel_err(fd_gradient(m.weights[li], loss), g.weights[li]) < 1e-4 &&
           max_rel_err(fd_gradient(m.biases[li], loss), g.biases[li]) < 1e-4;
    }
    ++configs;
  }
  return ok && configs >= 20;
}

// --- criterion 2: convolution oracle ---------------------------------------

bool criterion_conv_oracle() {
  Rng rng(202);
  for (int iter = 0; iter < 100; ++iter) {
    const int in_ch = 1 + static_cast<int>(rng.next_below(4));
    const int out_ch = 1 + static_cast<int>(rng.next_below(5));
    const int k = 1 + static_cast<int>(rng.next_below(4));
    const int stride = 1 + static_cast<int>(rng.next_below(3));
    const int pad = static_cast<int>(rng.next_below(3));
    const int h = k + static_cast<int>(rng.next_below(10));
    const int w = k + static_cast<int>(rng.next_below(10));
    const Tensor<double> x = random_tensor({in_ch, h, w}, rng);
    const Tensor<double> wt = random_tensor({out_ch, in_ch, k, k}, rng);
    const Tensor<double> b = random_tensor({out_ch}, rng);
    const Tensor<double> fast = nn::conv2d_forward(x, wt, b, stride, pad);
    const Tensor<double> slow = testsupport::conv2d_oracle(x, wt, b, stride, pad);
    if (fast.dims != slow.dims) return false;
    if ((fast.values - slow.values).lpNorm<Eigen::Infinity>() >= 1e-12) {
      return false;
    }
  }
  return true;
}

// --- criterion 3: dsp frequency response and tfr peak -----------------------

bool criterion_dsp() {
  const double rate = 160.0;
  const Eigen::Index n = 1600;
  const dsp::FilterSpec spec{8.0, 30.0, 4};

  const auto tone_response = [&](double gen_hz, double measure_hz) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x[i] = std::sin(2.0 * M_PI * gen_hz * static_cast<double>(i) / rate);
    }
    const Eigen::VectorXd y = dsp::bandpass(x, spec, rate);
    return testsupport::dft_amplitude(y.segment(n / 4, n / 2), measure_hz, rate);
  };

  const double pass_db = 20.0 * std::log10(tone_response(20.0, 20.0));
  if (std::abs(pass_db) > 1.0) return false;
  if (20.0 * std::log10(tone_response(2.0, 2.0)) > -20.0) return false;
  // A 100 Hz tone sampled at 160 Hz lands on 60 Hz.
  if (20.0 * std::log10(tone_response(100.0, 60.0)) > -20.0) return false;

  Eigen::VectorXd tone(1280);
  for (Eigen::Index i = 0; i < tone.size(); ++i) {
    tone[i] = std::sin(2.0 * M_PI * 12.0 * static_cast<double>(i) / rate);
  }
  dsp::MorletParams params;
  params.freqs_hz = dsp::frequency_grid(8.0, 30.0, 1.0);
  const dsp::TfrImage tfr = dsp::morlet_tfr(tone, rate, params, 64);
  Eigen::Index peak_row = 0;
  tfr.power.rowwise().mean().maxCoeff(&peak_row);
  return std::abs(tfr.freqs_hz[peak_row] - 12.0) <= 1.0;
}

// --- criterion 4: overfit sanity --------------------------------------------

data::LabeledSample separable_sample(int label, std::uint64_t seed) {
  data::LabeledSample s;
  s.image.resize(2, 3);
  Rng rng(seed);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      s.image(r, c) =
          (label == 0 ? 1.0 : -1.0) * (r == 0 ? 1.0 : -0.5) + 0.1 * rng.next_gauss();
    }
  }
  s.label = label;
  s.label_name = label == 0 ? "T0" : "T1";
  return s;
}

bool criterion_overfit() {
  data::DatasetSplit split;
  split.class_names = {"T0", "T1"};
  for (int i = 0; i < 16; ++i) split.train.push_back(separable_sample(i % 2, i));
  split.test = split.train;  // train == test by construction

  auto model = nn::init_params<double>(
      {nn::FlattenSpec{}, nn::DenseSpec{6, 2}, nn::SoftmaxSpec{}}, {1, 2, 3},
      {"T0", "T1"}, 4);
  train::TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.max_epochs = 50;
  cfg.learning_rate = 0.05;
  cfg.seed = 0;
  cfg.early_stop_patience = 0;
  const train::TrainResult result = train::train(model, split, cfg);

  bool reached = false;
  for (const train::CurvePoint& p : result.curve.points) {
    if (p.train_accuracy == 1.0 && p.epoch <= 50) reached = true;
  }
  return reached && result.curve.points.back().train_accuracy == 1.0 &&
         train::diagnose_overfitting(result.curve) ==
             train::Diagnosis::kConverged;
}

// --- criteria 5/6/8: the full cli pipeline on synthetic recordings ----------

struct PipelineFixture {
  testsupport::TempDir root{"acceptance"};
  fs::path config_path;
  fs::path out_a, out_b;
  bool built = false;

  bool run_cli(const std::string& args) const {
    const std::string cmd = std::string("\"") + MIBCI_CLI_PATH + "\" " + args +
                            " >> \"" + (root.path / "cli.log").string() +
                            "\" 2>&1";
    return std::system(cmd.c_str()) == 0;
  }

  bool run_pipeline(const fs::path& out_dir) const {
    const std::string common = " --config \"" + config_path.string() +
                               "\" --set paths.out_dir=" + out_dir.string();
    for (const char* stage : {"fetch", "preprocess", "build-dataset", "train",
                              "eval"}) {
      if (!run_cli(std::string(stage) + common)) return false;
    }
    return run_cli("infer-live" + common + " --subject S001 --run R01");
  }

  bool build() {
    unsetenv("MIBCI_CACHE");
    const fs::path data_dir = root.path / "data";
    fs::create_directories(data_dir);
    std::string manifest;
    for (int k = 1; k <= 3; ++k) {
      const std::string run = "R0" + std::to_string(k);
      const std::string bytes = testsupport::make_synthetic_run(1000 + k, 24);
      const fs::path file = data_dir / ("S001_" + run + ".edf");
      atomic_write_file(file, bytes);
      manifest += "S001 " + run + " file://" + file.string() + " " +
                  fetch::sha256_hex(bytes) + " " + std::to_string(bytes.size()) +
                  "\n";
    }
    atomic_write_file(root.path / "manifest.txt", manifest);
    config_path = root.path / "run.conf";
    atomic_write_file(config_path,
                      "dataset.manifest = " +
                          (root.path / "manifest.txt").string() + "\n" +
                          "dataset.cache_dir = " +
                          (root.path / "cache").string() + "\n" +
                          "dataset.subjects = S001\n" +
                          "dataset.runs = R01,R02,R03\n");
    out_a = root.path / "out_a";
    out_b = root.path / "out_b";
    built = run_pipeline(out_a) && run_pipeline(out_b);
    return built;
  }
};

bool criterion_small_data(const PipelineFixture& fx) {
  if (!fx.built) return false;
  const std::string report = read_file(fx.out_a / "eval_report.txt");
  const std::string key = "overall_accuracy: ";
  const std::size_t pos = report.find(key);
  if (pos == std::string::npos) return false;
  const std::size_t eol = report.find('\n', pos);
  const double accuracy =
      parse_double(report.substr(pos + key.size(), eol - pos - key.size()));
  std::cout << "  (small-data test accuracy: " << format_double(accuracy)
            << ")\n";
  return accuracy > 1.0 / 3.0 + 0.15;
}

std::string strip_latency_csv(const std::string& csv) {
  std::string out;
  for (const std::string& line : split(csv, '\n')) {
    const std::size_t comma = line.rfind(',');
    out += (comma == std::string::npos ? line : line.substr(0, comma)) + "\n";
  }
  return out;
}

std::string strip_latency_text(const std::string& text) {
  std::string out;
  for (const std::string& line : split(text, '\n')) {
    const std::size_t pos = line.find(" latency_s=");
    out += (pos == std::string::npos ? line : line.substr(0, pos)) + "\n";
  }
  return out;
}

bool criterion_restored_model(const PipelineFixture& fx) {
  if (!fx.built) return false;

  // Part 1: save -> load -> classify is bit-exact on a 10-chunk session.
  const nn::Model<double> in_memory = nn::load_model(fx.out_a / "model.mibc");
  const fs::path copy = fx.root.path / "model_copy.mibc";
  nn::save_model(in_memory, copy);
  const nn::Model<double> restored = nn::load_model(copy);

  const edf::Recording rec =
      edf::parse_edf(testsupport::make_synthetic_run(77, 10));
  const config::RunConfig defaults = config::run_config_from_string("");
  const dsp::ScoutSpec scout =
      dsp::find_scout(dsp::default_scouts(), defaults.scout_name);
  const auto chunks = live::replay(rec, scout, defaults.dsp.window_s,
                                   live::LabelPolicy::kAnnotationAligned);
  if (chunks.size() != 10) return false;
  for (const live::StreamChunk& chunk : chunks) {
    const live::InferenceEvent a =
        live::classify_chunk(in_memory, chunk, defaults.dsp);
    const live::InferenceEvent b =
        live::classify_chunk(restored, chunk, defaults.dsp);
    if (a.predicted_label != b.predicted_label) return false;
    if (a.confidence != b.confidence) return false;  // bit-exact
  }

  // Part 2: the two pipeline executions agree byte for byte.
  for (const char* name : {"model.mibc", "curve.csv", "eval_report.txt",
                           "eval_report.csv", "split_meta.txt"}) {
    if (read_file(fx.out_a / name) != read_file(fx.out_b / name)) return false;
  }
  if (strip_latency_csv(read_file(fx.out_a / "session_report.csv")) !=
      strip_latency_csv(read_file(fx.out_b / "session_report.csv"))) {
    return false;
  }
  return strip_latency_text(read_file(fx.out_a / "session_report.txt")) ==
         strip_latency_text(read_file(fx.out_b / "session_report.txt"));
}

bool criterion_determinism(const PipelineFixture& fx) {
  if (!fx.built) return false;
  const std::string a = read_file(fx.out_a / "curve.csv");
  return !a.empty() && a == read_file(fx.out_b / "curve.csv");
}

// --- criterion 7: interchange fidelity ---------------------------------------

bool criterion_interchange() {
  Rng rng(707);

  for (int iter = 0; iter < 50; ++iter) {  // csv round-trips
    testsupport::TempDir tmp("csv");
    const int rows = 1 + static_cast<int>(rng.next_below(4));
    const int cols = 1 + static_cast<int>(rng.next_below(5));
    data::DatasetSplit split;
    split.class_names = {"T0", "T1", "T2"};
    const auto make = [&](int label) {
      data::LabeledSample s;
      s.image.resize(rows, cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          s.image(r, c) = rng.next_gauss() * std::pow(10.0, rng.next_below(7));
        }
      }
      s.label = label;
      s.label_name = split.class_names[label];
      return s;
    };
    for (int i = 0; i < 4; ++i) split.train.push_back(make(static_cast<int>(rng.next_below(3))));
    for (int i = 0; i < 2; ++i) split.test.push_back(make(static_cast<int>(rng.next_below(3))));
    data::export_csv(split, tmp.path);
    const data::DatasetSplit back =
        data::import_csv(tmp.path, rows, cols, split.class_names);
    if (back.train.size() != split.train.size()) return false;
    for (std::size_t i = 0; i < split.train.size(); ++i) {
      if ((back.train[i].image - split.train[i].image).norm() != 0.0) return false;
      if (back.train[i].label != split.train[i].label) return false;
    }
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      if ((back.test[i].image - split.test[i].image).norm() != 0.0) return false;
    }
  }

  for (int iter = 0; iter < 50; ++iter) {  // edf round-trips
    const int n_channels = 1 + static_cast<int>(rng.next_below(4));
    const long n_records = 2 + static_cast<long>(rng.next_below(20));
    const int spr = 4 + static_cast<int>(rng.next_below(13));
    testsupport::OracleEdf file;
    file.n_records = n_records;
    std::vector<std::vector<double>> physical(n_channels);
    for (int c = 0; c < n_channels; ++c) {
      physical[c].resize(n_records * spr);
      for (double& v : physical[c]) v = 200.0 * (2.0 * rng.next_double() - 1.0);
      file.signals.push_back(testsupport::signal_from_physical(
          "CH" + std::to_string(c), physical[c], spr, -256.0, 256.0));
    }
    if (n_records >= 6) {
      file.annotations.push_back({0.5, 1.0, "T1"});
      file.annotations.push_back({2.5, 1.5, "T2"});
    }
    const edf::Recording rec = edf::parse_edf(testsupport::write_edf(file));
    if (rec.data.rows() != n_channels) return false;
    if (rec.n_samples() != n_records * spr) return false;
    const double quantum = 512.0 / 65535.0;
    for (int c = 0; c < n_channels; ++c) {
      for (long i = 0; i < n_records * spr; ++i) {
        if (std::abs(rec.data(c, i) - physical[c][i]) > quantum) return false;
      }
    }
    if (rec.annotations.size() != file.annotations.size()) return false;
    for (std::size_t i = 0; i < file.annotations.size(); ++i) {
      if (rec.annotations[i].onset_s != file.annotations[i].onset_s) return false;
      if (rec.annotations[i].duration_s != file.annotations[i].duration_s) return false;
      if (rec.annotations[i].label != file.annotations[i].label) return false;
    }
  }
  return true;
}

bool report(int id, const char* name, const std::function<bool()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string error;
  try {
    ok = body();
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << name
            << ") [" << format_double(std::round(seconds * 10.0) / 10.0)
            << " s]";
  if (!error.empty()) std::cout << " error: " << error;
  std::cout << "\n" << std::flush;
  return ok;
}

}  // namespace

int main() {
  PipelineFixture fx;

  bool all = true;
  all &= report(1, "gradient finite-difference suite", criterion_gradients);
  all &= report(2, "convolution vs naive oracle x100", criterion_conv_oracle);
  all &= report(3, "band-pass response and Morlet peak", criterion_dsp);
  all &= report(4, "16-sample overfit sanity", criterion_overfit);

  const bool pipeline_ok = fx.build();
  if (!pipeline_ok) {
    std::cout << "note: cli pipeline failed; see "
              << (fx.root.path / "cli.log").string() << "\n";
    std::cout << read_file(fx.root.path / "cli.log") << "\n";
  }
  all &= report(5, "small-data accuracy above chance",
                [&] { return criterion_small_data(fx); });
  all &= report(6, "restored-model bit-exactness and run identity",
                [&] { return criterion_restored_model(fx); });
  all &= report(7, "csv and edf interchange fidelity", criterion_interchange);
  all &= report(8, "bit-equal learning curves across runs",
                [&] { return criterion_determinism(fx); });
  return all ? 0 : 1;
}
