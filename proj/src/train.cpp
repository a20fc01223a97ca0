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

#include "mibci/train.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "mibci/util.hpp"

namespace mibci::train {
namespace {

void check_consistency(const EvalReport& r) {
  long total = 0, trace = 0;
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    trace += r.confusion(i, i);
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) {
      total += r.confusion(i, j);
    }
  }
  if (total != r.n_samples ||
      std::abs(r.overall_accuracy - static_cast<double>(trace) / total) > 1e-12) {
    fail("ShapeMismatch", "evaluation report is internally inconsistent");
  }
}

// Least-squares slope of acc vs epoch over the final `window` points.
double final_slope(const std::vector<CurvePoint>& pts, int window,
                   double CurvePoint::*field) {
  const int n = std::min<int>(window, static_cast<int>(pts.size()));
  if (n < 2) return 0.0;
  const auto* first = &pts[pts.size() - n];
  double mean_x = 0.0, mean_y = 0.0;
  for (int i = 0; i < n; ++i) {
    mean_x += first[i].epoch;
    mean_y += first[i].*field;
  }
  mean_x /= n;
  mean_y /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (first[i].epoch - mean_x) * (first[i].*field - mean_y);
    den += (first[i].epoch - mean_x) * (first[i].epoch - mean_x);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

std::string to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::kConverged: return "converged";
    case Diagnosis::kOverfitting: return "overfitting";
    case Diagnosis::kUnderfitting: return "underfitting";
    default: return "undetermined";
  }
}

nn::Tensor<double> image_to_tensor(const Eigen::MatrixXd& image) {
  nn::Tensor<double> t({1, static_cast<int>(image.rows()),
                        static_cast<int>(image.cols())});
  Eigen::Index idx = 0;
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      t.values[idx++] = image(r, c);
    }
  }
  return t;
}

int predict(const nn::Model<double>& model, const Eigen::MatrixXd& image) {
  const nn::Tensor<double> p =
      nn::forward(model, image_to_tensor(image), nn::Mode::kEval);
  Eigen::Index best = 0;
  p.values.maxCoeff(&best);  // first maximum: ties to the lowest index
  return static_cast<int>(best);
}

EvalReport evaluate(const nn::Model<double>& model,
                    const std::vector<data::LabeledSample>& samples) {
  if (samples.empty()) fail("EmptyEval", "no samples to evaluate");
  const int n_classes = model.n_classes();

  EvalReport r;
  r.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
  r.n_samples = static_cast<int>(samples.size());
  double loss_sum = 0.0;
  for (const data::LabeledSample& s : samples) {
    if (s.label < 0 || s.label >= n_classes) {
      fail("LabelOutOfRange", "sample label " + std::to_string(s.label));
    }
    const nn::Tensor<double> p =
        nn::forward(model, image_to_tensor(s.image), nn::Mode::kEval);
    Eigen::Index pred = 0;
    p.values.maxCoeff(&pred);
    r.confusion(s.label, pred) += 1;
    loss_sum += -std::log(p.values[s.label]);
  }
  r.mean_loss = loss_sum / r.n_samples;

  long trace = 0;
  r.per_class_recall.resize(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    trace += r.confusion(c, c);
    const long row_sum = r.confusion.row(c).sum();
    r.per_class_recall[c] =
        row_sum > 0 ? static_cast<double>(r.confusion(c, c)) / row_sum
                    : std::numeric_limits<double>::quiet_NaN();
  }
  r.overall_accuracy = static_cast<double>(trace) / r.n_samples;
  check_consistency(r);
  return r;
}

TrainResult train(const nn::Model<double>& initial,
                  const data::DatasetSplit& split, const TrainConfig& cfg,
                  std::ostream* log) {
  if (cfg.batch_size < 1 || cfg.max_epochs < 1 || !(cfg.learning_rate > 0.0) ||
      cfg.eval_every < 1) {
    fail("ShapeMismatch", "invalid training configuration");
  }
  if (split.train.empty() || split.test.empty()) {
    fail("EmptyEval", "both splits must be non-empty");
  }

  // Tensors up front; images are immutable during training.
  std::vector<nn::Tensor<double>> train_images;
  train_images.reserve(split.train.size());
  for (const data::LabeledSample& s : split.train) {
    train_images.push_back(image_to_tensor(s.image));
  }

  TrainResult result;
  result.model = initial;
  nn::AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  auto adam = nn::AdamState<double>::zero_like(result.model);
  Rng dropout_rng(cfg.seed ^ 0xd1b54a32d192ed03ULL);

  nn::Model<double> best_model = result.model;
  double best_test_acc = -1.0;
  int evals_since_improvement = 0;

  const std::size_t n_train = split.train.size();
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
    Rng shuffle_rng(cfg.seed ^ static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t stop = std::min(n_train, start + cfg.batch_size);
      nn::Gradients<double> batch_grads;
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t idx = order[i];
        nn::ForwardCache<double> cache;
        nn::forward(result.model, train_images[idx], nn::Mode::kTrain,
                    &dropout_rng, &cache);
        batch_loss += -std::log(cache.probabilities.values[split.train[idx].label]);
        nn::Gradients<double> g =
            nn::backward(result.model, cache, split.train[idx].label);
        if (batch_grads.weights.empty()) {
          batch_grads = std::move(g);
        } else {
          for (std::size_t li = 0; li < g.weights.size(); ++li) {
            if (g.weights[li].empty()) continue;
            batch_grads.weights[li].values += g.weights[li].values;
            batch_grads.biases[li].values += g.biases[li].values;
          }
        }
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      batch_loss *= scale;
      if (!std::isfinite(batch_loss)) {
        fail("NonFiniteLoss",
             "epoch " + std::to_string(epoch) + " batch " +
                 std::to_string(start / cfg.batch_size) + " lr " +
                 format_double(cfg.learning_rate));
      }
      for (std::size_t li = 0; li < batch_grads.weights.size(); ++li) {
        if (batch_grads.weights[li].empty()) continue;
        batch_grads.weights[li].values *= scale;
        batch_grads.biases[li].values *= scale;
      }
      nn::adam_step(result.model, batch_grads, adam, adam_cfg);
    }

    if (epoch % cfg.eval_every != 0 && epoch != cfg.max_epochs) continue;

    const EvalReport train_report = evaluate(result.model, split.train);
    const EvalReport test_report = evaluate(result.model, split.test);
    result.curve.points.push_back({epoch, train_report.mean_loss,
                                   train_report.overall_accuracy,
                                   test_report.mean_loss,
                                   test_report.overall_accuracy});
    if (log) {
      *log << "epoch=" << epoch
           << " train_acc=" << format_double(train_report.overall_accuracy)
           << " test_acc=" << format_double(test_report.overall_accuracy)
           << " loss=" << format_double(train_report.mean_loss) << "\n";
    }

    if (test_report.overall_accuracy > best_test_acc) {
      best_test_acc = test_report.overall_accuracy;
      best_model = result.model;
      evals_since_improvement = 0;
    } else {
      ++evals_since_improvement;
    }
    if (cfg.early_stop_patience > 0 &&
        evals_since_improvement >= cfg.early_stop_patience) {
      break;
    }
  }

  if (cfg.early_stop_patience > 0) result.model = std::move(best_model);
  return result;
}

Diagnosis diagnose_overfitting(const LearningCurve& curve, double gap_threshold,
                               int window) {
  const auto& pts = curve.points;
  if (pts.empty()) return Diagnosis::kUndetermined;
  const int n = std::min<int>(window, static_cast<int>(pts.size()));

  double gap = 0.0;
  for (int i = 0; i < n; ++i) {
    const CurvePoint& p = pts[pts.size() - n + i];
    gap += p.train_accuracy - p.test_accuracy;
  }
  gap /= n;

  const double train_slope = final_slope(pts, window, &CurvePoint::train_accuracy);
  const double test_slope = final_slope(pts, window, &CurvePoint::test_accuracy);
  constexpr double kNoiseSlope = 0.002;  // per epoch

  if (gap > gap_threshold && train_slope >= -1e-12) {
    return Diagnosis::kOverfitting;
  }
  if (gap <= gap_threshold && std::abs(train_slope) < kNoiseSlope &&
      std::abs(test_slope) < kNoiseSlope) {
    return Diagnosis::kConverged;
  }
  if (pts.back().train_accuracy < 0.6) return Diagnosis::kUnderfitting;
  return Diagnosis::kUndetermined;
}

std::string curve_to_csv(const LearningCurve& curve) {
  std::string out = "epoch,train_loss,train_acc,test_loss,test_acc\n";
  for (const CurvePoint& p : curve.points) {
    out += std::to_string(p.epoch) + ',' + format_double(p.train_loss) + ',' +
           format_double(p.train_accuracy) + ',' + format_double(p.test_loss) +
           ',' + format_double(p.test_accuracy) + '\n';
  }
  return out;
}

void emit_curve_csv(const LearningCurve& curve,
                    const std::filesystem::path& path) {
  atomic_write_file(path, curve_to_csv(curve));
}

std::string format_eval_report(const EvalReport& report,
                               const std::vector<std::string>& class_names) {
  std::string out;
  out += "samples: " + std::to_string(report.n_samples) + "\n";
  out += "overall_accuracy: " + format_double(report.overall_accuracy) + "\n";
  out += "mean_loss: " + format_double(report.mean_loss) + "\n";
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    const double recall = report.per_class_recall[static_cast<Eigen::Index>(c)];
    out += "detection_probability[" + class_names[c] + "]: " +
           (std::isnan(recall) ? std::string("undefined") : format_double(recall)) +
           "\n";
  }
  out += "confusion (rows true, cols predicted):\n";
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    out += "  " + class_names[i] + ":";
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) {
      out += " " + std::to_string(report.confusion(i, j));
    }
    out += "\n";
  }
  return out;
}

std::string eval_report_to_csv(const EvalReport& report,
                               const std::vector<std::string>& class_names) {
  std::string out = "class,detection_probability";
  for (const std::string& name : class_names) out += ",pred_" + name;
  out += "\n";
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    const double recall = report.per_class_recall[i];
    out += class_names[i] + "," +
           (std::isnan(recall) ? std::string("undefined") : format_double(recall));
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) {
      out += "," + std::to_string(report.confusion(i, j));
    }
    out += "\n";
  }
  out += "overall," + format_double(report.overall_accuracy);
  for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) out += ",";
  out += "\n";
  return out;
}

}  // namespace mibci::train
