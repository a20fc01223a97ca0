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

#ifndef MIBCI_TRAIN_HPP
#define MIBCI_TRAIN_HPP

#include <filesystem>
#include <iosfwd>

#include "mibci/adam.hpp"
#include "mibci/dataset.hpp"
#include "mibci/model.hpp"

namespace mibci::train {

struct TrainConfig {
  int batch_size = 32;
  int max_epochs = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int eval_every = 1;           // epochs between logged evaluations
  int early_stop_patience = 10; // logged evaluations without improvement; 0 off
};

struct CurvePoint {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
};

struct LearningCurve {
  std::vector<CurvePoint> points;
};

struct EvalReport {
  double overall_accuracy = 0.0;
  double mean_loss = 0.0;
  // Per-class detection probability (recall); NaN marks a class with no
  // samples rather than 0.
  Eigen::VectorXd per_class_recall;
  Eigen::MatrixXi confusion;  // true class x predicted class
  int n_samples = 0;
};

enum class Diagnosis { kConverged, kOverfitting, kUnderfitting, kUndetermined };
std::string to_string(Diagnosis d);

struct TrainResult {
  nn::Model<double> model;
  LearningCurve curve;
};

// Flattens a freqs x time image into the (1, rows, cols) input tensor.
nn::Tensor<double> image_to_tensor(const Eigen::MatrixXd& image);

// Argmax class of one image, ties to the lowest index.
int predict(const nn::Model<double>& model, const Eigen::MatrixXd& image);

// Deterministic mini-batch Adam training: the per-epoch sample order is a
// Fisher-Yates shuffle keyed by cfg.seed ^ epoch, gradients are averaged in
// sample order, and dropout draws come from a stream seeded by cfg.seed.
// When early stopping is enabled the best-test-accuracy snapshot is
// returned. Progress lines go to `log` (one per logged evaluation).
// Throws: ShapeMismatch, NonFiniteLoss.
TrainResult train(const nn::Model<double>& model, const data::DatasetSplit& split,
                  const TrainConfig& cfg, std::ostream* log = nullptr);

// Throws: EmptyEval.
EvalReport evaluate(const nn::Model<double>& model,
                    const std::vector<data::LabeledSample>& samples);

Diagnosis diagnose_overfitting(const LearningCurve& curve,
                               double gap_threshold = 0.15, int window = 5);

// Header `epoch,train_loss,train_acc,test_loss,test_acc`, one row per point.
void emit_curve_csv(const LearningCurve& curve, const std::filesystem::path& path);
std::string curve_to_csv(const LearningCurve& curve);

std::string format_eval_report(const EvalReport& report,
                               const std::vector<std::string>& class_names);
std::string eval_report_to_csv(const EvalReport& report,
                               const std::vector<std::string>& class_names);

}  // namespace mibci::train

#endif  // MIBCI_TRAIN_HPP
