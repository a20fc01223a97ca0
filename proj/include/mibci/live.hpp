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

#ifndef MIBCI_LIVE_HPP
#define MIBCI_LIVE_HPP

#include <map>
#include <optional>

#include "mibci/dataset.hpp"
#include "mibci/model.hpp"

namespace mibci::live {

// Everything needed to turn a raw scout window into a network input.
struct DspParams {
  dsp::FilterSpec filter;
  dsp::MorletParams morlet;
  int time_bins = 64;
  double window_s = 4.0;
  double offset_s = 0.0;
};

enum class LabelPolicy {
  kAnnotationAligned,  // one chunk per qualifying annotation, label attached
  kFixedStride,        // back-to-back windows; label only when unambiguous
};

struct StreamChunk {
  Eigen::VectorXd samples;  // raw scout-projected window
  double sample_rate_hz = 0.0;
  double t_start_s = 0.0;
  std::optional<std::string> true_label;
};

struct InferenceEvent {
  double t_start_s = 0.0;
  std::string predicted_label;
  double confidence = 0.0;  // max softmax probability
  std::optional<std::string> true_label;
  double latency_s = 0.0;
};

struct SessionReport {
  std::vector<InferenceEvent> events;
  int n_correct = 0;
  int n_total = 0;  // events carrying a true label
  double accuracy = 0.0;  // NaN when n_total == 0
  std::map<std::string, std::pair<int, int>> per_class;  // label -> (correct, total)
};

// Cuts a recording into time-ordered, non-overlapping chunks of window_s
// seconds from the scout-projected series. Throws: TooShort, UnknownChannel.
std::vector<StreamChunk> replay(const edf::Recording& rec,
                                const dsp::ScoutSpec& scout, double window_s,
                                LabelPolicy policy, double offset_s = 0.0);

// The identical per-window pipeline the dataset path uses: band-pass,
// Morlet TFR, row standardization from the model's stored stats.
Eigen::MatrixXd chunk_to_image(const Eigen::VectorXd& samples,
                               double sample_rate_hz, const DspParams& params,
                               const dsp::NormStats& stats);

// Deterministic apart from the measured latency. Throws: ShapeMismatch.
InferenceEvent classify_chunk(const nn::Model<double>& model,
                              const StreamChunk& chunk, const DspParams& params);

// Loads the model, replays annotation-aligned, classifies every chunk.
SessionReport run_session(const std::filesystem::path& model_path,
                          const edf::Recording& rec, const dsp::ScoutSpec& scout,
                          const DspParams& params);
SessionReport run_session(const nn::Model<double>& model,
                          const edf::Recording& rec, const dsp::ScoutSpec& scout,
                          const DspParams& params);

// One line per event plus a summary line.
std::string format_session_report(const SessionReport& report);
// Same columns as CSV: t,pred,conf,true,latency_s.
std::string session_report_to_csv(const SessionReport& report);

}  // namespace mibci::live

#endif  // MIBCI_LIVE_HPP
