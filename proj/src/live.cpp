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

#include "mibci/live.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "mibci/train.hpp"
#include "mibci/util.hpp"

namespace mibci::live {

std::vector<StreamChunk> replay(const edf::Recording& rec,
                                const dsp::ScoutSpec& scout, double window_s,
                                LabelPolicy policy, double offset_s) {
  if (rec.duration_s() <= window_s) {
    fail("TooShort", "recording of " + format_double(rec.duration_s()) +
                         " s cannot host a " + format_double(window_s) +
                         " s window");
  }
  const Eigen::VectorXd series = dsp::scout_project(rec, scout);
  const double rate = rec.sample_rate_hz;
  const Eigen::Index window = std::lround(window_s * rate);

  std::vector<StreamChunk> chunks;
  if (policy == LabelPolicy::kAnnotationAligned) {
    const dsp::EpochBatch batch =
        dsp::epoch_by_annotations(rec, series, window_s, offset_s);
    for (const dsp::Epoch& e : batch.epochs) {
      StreamChunk c;
      c.samples = e.samples;
      c.sample_rate_hz = rate;
      c.t_start_s = e.source.onset_s + offset_s;
      c.true_label = e.label;
      chunks.push_back(std::move(c));
    }
  } else {
    constexpr double eps = 1e-9;
    for (Eigen::Index start = 0; start + window <= series.size();
         start += window) {
      StreamChunk c;
      c.samples = series.segment(start, window);
      c.sample_rate_hz = rate;
      c.t_start_s = static_cast<double>(start) / rate;
      // Label only when the window lies entirely inside one annotation.
      for (const edf::Annotation& a : rec.annotations) {
        if (c.t_start_s >= a.onset_s - eps &&
            c.t_start_s + window_s <= a.onset_s + a.duration_s + eps) {
          c.true_label = a.label;
          break;
        }
      }
      chunks.push_back(std::move(c));
    }
  }
  return chunks;
}

Eigen::MatrixXd chunk_to_image(const Eigen::VectorXd& samples,
                               double sample_rate_hz, const DspParams& params,
                               const dsp::NormStats& stats) {
  const Eigen::VectorXd filtered =
      dsp::bandpass(samples, params.filter, sample_rate_hz);
  const dsp::TfrImage tfr =
      dsp::morlet_tfr(filtered, sample_rate_hz, params.morlet, params.time_bins);
  return dsp::normalize_tfr(tfr, stats);
}

InferenceEvent classify_chunk(const nn::Model<double>& model,
                              const StreamChunk& chunk, const DspParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd image = chunk_to_image(
      chunk.samples, chunk.sample_rate_hz, params, model.norm_stats);
  const nn::Tensor<double> p =
      nn::forward(model, train::image_to_tensor(image), nn::Mode::kEval);
  Eigen::Index pred = 0;
  const double confidence = p.values.maxCoeff(&pred);
  const auto t1 = std::chrono::steady_clock::now();

  InferenceEvent e;
  e.t_start_s = chunk.t_start_s;
  e.predicted_label = model.class_names[pred];
  e.confidence = confidence;
  e.true_label = chunk.true_label;
  e.latency_s = std::chrono::duration<double>(t1 - t0).count();
  return e;
}

SessionReport run_session(const nn::Model<double>& model,
                          const edf::Recording& rec, const dsp::ScoutSpec& scout,
                          const DspParams& params) {
  SessionReport report;
  for (const StreamChunk& chunk :
       replay(rec, scout, params.window_s, LabelPolicy::kAnnotationAligned,
              params.offset_s)) {
    InferenceEvent e = classify_chunk(model, chunk, params);
    if (e.true_label) {
      auto& [correct, total] = report.per_class[*e.true_label];
      ++total;
      ++report.n_total;
      if (*e.true_label == e.predicted_label) {
        ++correct;
        ++report.n_correct;
      }
    }
    report.events.push_back(std::move(e));
  }
  report.accuracy =
      report.n_total > 0
          ? static_cast<double>(report.n_correct) / report.n_total
          : std::numeric_limits<double>::quiet_NaN();
  return report;
}

SessionReport run_session(const std::filesystem::path& model_path,
                          const edf::Recording& rec, const dsp::ScoutSpec& scout,
                          const DspParams& params) {
  return run_session(nn::load_model(model_path), rec, scout, params);
}

namespace {

std::string event_fields(const InferenceEvent& e, char sep) {
  std::string out;
  out += format_double(e.t_start_s);
  out += sep;
  out += e.predicted_label;
  out += sep;
  out += format_double(e.confidence);
  out += sep;
  out += e.true_label ? *e.true_label : std::string("-");
  out += sep;
  out += format_double(e.latency_s);
  return out;
}

std::string summary_line(const SessionReport& r) {
  std::string out = "events=" + std::to_string(r.events.size()) +
                    " labeled=" + std::to_string(r.n_total) +
                    " correct=" + std::to_string(r.n_correct) + " accuracy=";
  out += std::isnan(r.accuracy) ? std::string("undefined")
                                : format_double(r.accuracy);
  for (const auto& [label, counts] : r.per_class) {
    out += " " + label + "=" + std::to_string(counts.first) + "/" +
           std::to_string(counts.second);
  }
  return out;
}

}  // namespace

std::string format_session_report(const SessionReport& report) {
  std::string out;
  for (const InferenceEvent& e : report.events) {
    out += "t=" + format_double(e.t_start_s) + " pred=" + e.predicted_label +
           " conf=" + format_double(e.confidence) + " true=" +
           (e.true_label ? *e.true_label : std::string("-")) +
           " latency_s=" + format_double(e.latency_s) + "\n";
  }
  out += summary_line(report) + "\n";
  return out;
}

std::string session_report_to_csv(const SessionReport& report) {
  std::string out = "t,pred,conf,true,latency_s\n";
  for (const InferenceEvent& e : report.events) {
    out += event_fields(e, ',') + "\n";
  }
  return out;
}

}  // namespace mibci::live
