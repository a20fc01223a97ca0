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

#ifndef MIBCI_DSP_HPP
#define MIBCI_DSP_HPP

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mibci/edf.hpp"

namespace mibci::dsp {

// Band-pass design. `order` is the order of the Butterworth low-pass
// prototype; the resulting band-pass has 2*order poles and each band edge
// rolls off at order*6 dB/octave.
struct FilterSpec {
  double low_hz = 5.0;
  double high_hz = 50.0;
  int order = 4;
};

// A region of interest realized as a normalized weighting over channels.
struct ScoutSpec {
  std::string name;
  std::map<std::string, double> weights;  // channel -> non-negative weight
};

struct SampleSource {
  std::string subject;
  std::string run;
  double onset_s = 0.0;
};

struct Epoch {
  Eigen::VectorXd samples;  // scout-projected, single channel
  double sample_rate_hz = 0.0;
  std::string label;  // T0/T1/T2
  SampleSource source;
};

struct EpochBatch {
  std::vector<Epoch> epochs;
  int skipped = 0;  // annotations that did not fit the window
};

struct MorletParams {
  double center_freq_hz = 1.0;
  double fwhm_s = 3.0;  // Gaussian envelope FWHM at center_freq_hz
  Eigen::VectorXd freqs_hz;  // strictly increasing analysis grid
};

// 8..30 Hz step 1 by default (23 rows).
Eigen::VectorXd frequency_grid(double lo_hz, double hi_hz, double step_hz);

struct TfrImage {
  Eigen::MatrixXd power;  // freqs x time_bins, (signal units)^2
  Eigen::VectorXd freqs_hz;
  double time_bin_s = 0.0;
  // Seconds at each end where wavelet support crossed the epoch boundary
  // (worst case over the grid). Flagged, but included in pooling.
  double edge_s = 0.0;
};

// Per-frequency-row standardization statistics, computed on the training
// split only.
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // entries <= 0 are treated as 1
};

// Zero-phase (forward-backward) Butterworth band-pass; output has the same
// length as the input. Throws: TooShort, InvalidSpec.
Eigen::VectorXd bandpass(const Eigen::VectorXd& series, const FilterSpec& spec,
                         double sample_rate_hz);

// Weighted channel combination. Throws: UnknownChannel.
Eigen::VectorXd scout_project(const edf::Recording& rec, const ScoutSpec& scout);

// One epoch per annotation whose [onset+offset, onset+offset+window] fits
// inside both the recording and the annotation's own span.
EpochBatch epoch_by_annotations(const edf::Recording& rec,
                                const Eigen::VectorXd& scout_series,
                                double window_s, double offset_s);

// Complex Morlet time-frequency power map; wavelets have unit L2 norm and
// support truncated at +-3 sigma_t; the time axis is mean-pooled to exactly
// time_bins columns. Throws: EpochTooShort.
TfrImage morlet_tfr(const Eigen::VectorXd& samples, double sample_rate_hz,
                    const MorletParams& params, int time_bins);
TfrImage morlet_tfr(const Epoch& epoch, const MorletParams& params,
                    int time_bins);

// (power - mean[row]) / stddev[row]. Throws: ShapeMismatch.
Eigen::MatrixXd normalize_tfr(const TfrImage& img, const NormStats& stats);

// Scout definition file: one scout per line, `name channel:weight ...`.
// Weights are renormalized to sum to 1; a deviation above 1e-6 is reported
// on stderr. Throws: ParseError.
std::vector<ScoutSpec> load_scout_file(const std::filesystem::path& path);
std::vector<ScoutSpec> parse_scout_text(std::string_view text);

// Built-in R1-R5/L1-L5 motor-cortex scouts over standard 10-10 electrode
// names as recorded in the PhysioBank motor-imagery files.
std::vector<ScoutSpec> default_scouts();

const ScoutSpec& find_scout(const std::vector<ScoutSpec>& scouts,
                            const std::string& name);

}  // namespace mibci::dsp

#endif  // MIBCI_DSP_HPP
