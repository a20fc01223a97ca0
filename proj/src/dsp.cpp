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

#include "mibci/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <numbers>

#include "mibci/errors.hpp"
#include "mibci/util.hpp"

namespace mibci::dsp {
namespace {

using std::numbers::pi;
using Complex = std::complex<double>;

struct Biquad {
  double b0, b1, b2;  // numerator
  double a1, a2;      // denominator (a0 normalized to 1)
};

// Butterworth band-pass via the analog prototype: low-pass poles of order
// `order`, LP->BP transform around the prewarped band, then bilinear.
std::vector<Biquad> design_bandpass(const FilterSpec& spec, double fs) {
  const int n = spec.order;
  const double fs2 = 2.0 * fs;
  const double w1 = fs2 * std::tan(pi * spec.low_hz / fs);
  const double w2 = fs2 * std::tan(pi * spec.high_hz / fs);
  const double w0_sq = w1 * w2;
  const double bw = w2 - w1;

  std::vector<Complex> zpoles;
  zpoles.reserve(2 * n);
  for (int k = 0; k < n; ++k) {
    const double theta = pi / 2.0 + pi * (2 * k + 1) / (2.0 * n);
    const Complex proto(std::cos(theta), std::sin(theta));
    // s^2 - proto*bw*s + w0^2 = 0
    const Complex a = proto * (bw / 2.0);
    const Complex disc = std::sqrt(a * a - w0_sq);
    for (const Complex s : {a + disc, a - disc}) {
      zpoles.push_back((fs2 + s) / (fs2 - s));
    }
  }

  // Pair conjugate poles into real second-order sections; each section also
  // takes one zero at z=1 and one at z=-1.
  std::vector<Biquad> sos;
  std::vector<double> real_poles;
  std::vector<bool> used(zpoles.size(), false);
  constexpr double tol = 1e-9;
  for (std::size_t i = 0; i < zpoles.size(); ++i) {
    if (used[i]) continue;
    if (std::abs(zpoles[i].imag()) < tol) {
      real_poles.push_back(zpoles[i].real());
      used[i] = true;
      continue;
    }
    std::size_t best = zpoles.size();
    double best_dist = 1e300;
    for (std::size_t j = i + 1; j < zpoles.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(zpoles[j] - std::conj(zpoles[i]));
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    if (best == zpoles.size()) fail("InvalidSpec", "unpaired complex pole");
    used[i] = used[best] = true;
    const double re = 0.5 * (zpoles[i].real() + zpoles[best].real());
    const double mag_sq = (zpoles[i] * zpoles[best]).real();
    sos.push_back({1.0, 0.0, -1.0, -2.0 * re, mag_sq});
  }
  std::sort(real_poles.begin(), real_poles.end());
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    sos.push_back({1.0, 0.0, -1.0, -(real_poles[i] + real_poles[i + 1]),
                   real_poles[i] * real_poles[i + 1]});
  }

  // Normalize to unit gain at the geometric band center.
  const double fc = std::sqrt(spec.low_hz * spec.high_hz);
  const Complex zc = std::polar(1.0, 2.0 * pi * fc / fs);
  const Complex zi = 1.0 / zc;
  Complex h(1.0, 0.0);
  for (const Biquad& q : sos) {
    h *= (q.b0 + q.b1 * zi + q.b2 * zi * zi) /
         (1.0 + q.a1 * zi + q.a2 * zi * zi);
  }
  const double k = 1.0 / std::abs(h);
  sos.front().b0 *= k;
  sos.front().b1 *= k;
  sos.front().b2 *= k;
  return sos;
}

// Direct form II transposed, zero initial state.
Eigen::VectorXd sos_filter(const std::vector<Biquad>& sos,
                           Eigen::VectorXd x) {
  for (const Biquad& q : sos) {
    double s1 = 0.0, s2 = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double in = x[i];
      const double out = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * out + s2;
      s2 = q.b2 * in - q.a2 * out;
      x[i] = out;
    }
  }
  return x;
}

}  // namespace

Eigen::VectorXd frequency_grid(double lo_hz, double hi_hz, double step_hz) {
  if (!(lo_hz > 0.0) || !(hi_hz > lo_hz) || !(step_hz > 0.0)) {
    fail("InvalidSpec", "frequency grid requires 0 < lo < hi and step > 0");
  }
  const int n = static_cast<int>(std::floor((hi_hz - lo_hz) / step_hz + 1e-9)) + 1;
  Eigen::VectorXd grid(n);
  for (int i = 0; i < n; ++i) grid[i] = lo_hz + i * step_hz;
  return grid;
}

Eigen::VectorXd bandpass(const Eigen::VectorXd& series, const FilterSpec& spec,
                         double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0) || !(spec.low_hz > 0.0) ||
      !(spec.high_hz > spec.low_hz) || !(spec.high_hz < sample_rate_hz / 2.0)) {
    fail("InvalidSpec", "band edges must satisfy 0 < low < high < rate/2");
  }
  if (spec.order < 2 || spec.order % 2 != 0) {
    fail("InvalidSpec", "filter order must be even and >= 2");
  }
  const Eigen::Index n = series.size();
  if (n <= 3 * spec.order) {
    fail("TooShort", "series of " + std::to_string(n) +
                         " samples is too short for order " +
                         std::to_string(spec.order));
  }

  const std::vector<Biquad> sos = design_bandpass(spec, sample_rate_hz);

  // Odd-reflection padding long enough to absorb the low-edge transient.
  const Eigen::Index padlen = std::min<Eigen::Index>(
      n - 1, std::max<Eigen::Index>(
                 3 * spec.order,
                 static_cast<Eigen::Index>(
                     std::ceil(3.0 * sample_rate_hz / spec.low_hz))));
  Eigen::VectorXd ext(n + 2 * padlen);
  for (Eigen::Index i = 0; i < padlen; ++i) {
    ext[i] = 2.0 * series[0] - series[padlen - i];
  }
  ext.segment(padlen, n) = series;
  for (Eigen::Index i = 0; i < padlen; ++i) {
    ext[padlen + n + i] = 2.0 * series[n - 1] - series[n - 2 - i];
  }

  Eigen::VectorXd y = sos_filter(sos, std::move(ext));
  y.reverseInPlace();
  y = sos_filter(sos, std::move(y));
  y.reverseInPlace();
  return y.segment(padlen, n);
}

Eigen::VectorXd scout_project(const edf::Recording& rec, const ScoutSpec& scout) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rec.n_samples());
  for (const auto& [channel, weight] : scout.weights) {
    const auto it =
        std::find(rec.channels.begin(), rec.channels.end(), channel);
    if (it == rec.channels.end()) {
      fail("UnknownChannel",
           "scout " + scout.name + " references missing channel " + channel);
    }
    out += weight * rec.data.row(it - rec.channels.begin()).transpose();
  }
  return out;
}

EpochBatch epoch_by_annotations(const edf::Recording& rec,
                                const Eigen::VectorXd& scout_series,
                                double window_s, double offset_s) {
  EpochBatch batch;
  const double rate = rec.sample_rate_hz;
  const Eigen::Index window = std::lround(window_s * rate);
  const Eigen::Index total = scout_series.size();
  constexpr double eps = 1e-9;

  for (const edf::Annotation& a : rec.annotations) {
    const double start_s = a.onset_s + offset_s;
    const bool inside_annotation = start_s >= a.onset_s - eps &&
                                   start_s + window_s <= a.onset_s + a.duration_s + eps;
    const Eigen::Index start = std::lround(start_s * rate);
    if (!inside_annotation || start < 0 || start + window > total) {
      ++batch.skipped;
      continue;
    }
    Epoch e;
    e.samples = scout_series.segment(start, window);
    e.sample_rate_hz = rate;
    e.label = a.label;
    e.source = {rec.subject_id, rec.run_id, a.onset_s};
    batch.epochs.push_back(std::move(e));
  }
  return batch;
}

TfrImage morlet_tfr(const Eigen::VectorXd& samples, double sample_rate_hz,
                    const MorletParams& params, int time_bins) {
  const Eigen::Index n = samples.size();
  const int n_freqs = static_cast<int>(params.freqs_hz.size());
  if (n_freqs == 0 || !(params.fwhm_s > 0.0) || !(params.center_freq_hz > 0.0)) {
    fail("InvalidSpec", "Morlet parameters out of range");
  }
  for (int i = 0; i < n_freqs; ++i) {
    if (!(params.freqs_hz[i] > 0.0) ||
        (i > 0 && params.freqs_hz[i] <= params.freqs_hz[i - 1])) {
      fail("InvalidSpec", "frequency grid must be positive and increasing");
    }
  }
  if (time_bins < 1 || n < time_bins) {
    fail("EpochTooShort", "cannot pool " + std::to_string(n) +
                              " samples into " + std::to_string(time_bins) +
                              " bins");
  }

  // sigma_t scales inversely with frequency relative to the design point.
  const double sigma_at_center = params.fwhm_s / 2.355;
  const double sigma_lowest =
      sigma_at_center * params.center_freq_hz / params.freqs_hz[0];
  const Eigen::Index support_lowest =
      2 * static_cast<Eigen::Index>(std::ceil(3.0 * sigma_lowest * sample_rate_hz)) + 1;
  if (n < support_lowest) {
    fail("EpochTooShort",
         "epoch shorter than the wavelet support at the lowest frequency");
  }

  TfrImage img;
  img.freqs_hz = params.freqs_hz;
  img.power.resize(n_freqs, time_bins);
  img.time_bin_s = (static_cast<double>(n) / sample_rate_hz) / time_bins;
  img.edge_s = 3.0 * sigma_lowest;

  Eigen::VectorXd row(n);
  for (int fi = 0; fi < n_freqs; ++fi) {
    const double f = params.freqs_hz[fi];
    const double sigma = sigma_at_center * params.center_freq_hz / f;
    const Eigen::Index half =
        static_cast<Eigen::Index>(std::ceil(3.0 * sigma * sample_rate_hz));
    const Eigen::Index taps = 2 * half + 1;

    Eigen::VectorXd wav_re(taps), wav_im(taps);
    for (Eigen::Index k = 0; k < taps; ++k) {
      const double t = static_cast<double>(k - half) / sample_rate_hz;
      const double g = std::exp(-t * t / (2.0 * sigma * sigma));
      wav_re[k] = g * std::cos(2.0 * pi * f * t);
      wav_im[k] = g * std::sin(2.0 * pi * f * t);
    }
    const double norm =
        std::sqrt(wav_re.squaredNorm() + wav_im.squaredNorm());
    wav_re /= norm;
    wav_im /= norm;

    // Same-length correlation with zero padding outside the epoch.
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, t - half);
      const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + half);
      const Eigen::Index len = hi - lo + 1;
      const Eigen::Index w0 = lo - (t - half);
      const double re = wav_re.segment(w0, len).dot(samples.segment(lo, len));
      const double im = wav_im.segment(w0, len).dot(samples.segment(lo, len));
      row[t] = re * re + im * im;
    }

    // Mean pooling to exactly time_bins columns.
    for (int b = 0; b < time_bins; ++b) {
      const Eigen::Index lo = (n * b) / time_bins;
      const Eigen::Index hi = (n * (b + 1)) / time_bins;
      img.power(fi, b) = row.segment(lo, hi - lo).mean();
    }
  }
  return img;
}

TfrImage morlet_tfr(const Epoch& epoch, const MorletParams& params,
                    int time_bins) {
  return morlet_tfr(epoch.samples, epoch.sample_rate_hz, params, time_bins);
}

Eigen::MatrixXd normalize_tfr(const TfrImage& img, const NormStats& stats) {
  if (stats.mean.size() != img.power.rows() ||
      stats.stddev.size() != img.power.rows()) {
    fail("ShapeMismatch", "normalization stats have " +
                              std::to_string(stats.mean.size()) +
                              " rows, image has " +
                              std::to_string(img.power.rows()));
  }
  Eigen::MatrixXd out = img.power;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double sd = stats.stddev[r] > 0.0 ? stats.stddev[r] : 1.0;
    out.row(r) = (out.row(r).array() - stats.mean[r]) / sd;
  }
  return out;
}

std::vector<ScoutSpec> parse_scout_text(std::string_view text) {
  std::vector<ScoutSpec> scouts;
  int line_no = 0;
  for (const std::string& line : split(text, '\n')) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const std::vector<std::string> fields = split_whitespace(body);
    if (fields.size() < 2) {
      fail("ParseError", "scout line " + std::to_string(line_no) +
                             ": expected `name channel:weight ...`");
    }
    ScoutSpec scout;
    scout.name = fields[0];
    double sum = 0.0;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const std::size_t colon = fields[i].find(':');
      if (colon == std::string::npos) {
        fail("ParseError", "scout line " + std::to_string(line_no) +
                               ": missing ':' in '" + fields[i] + "'");
      }
      const std::string channel = fields[i].substr(0, colon);
      const double w = parse_double(fields[i].substr(colon + 1));
      if (w < 0.0) {
        fail("ParseError", "scout line " + std::to_string(line_no) +
                               ": negative weight for " + channel);
      }
      scout.weights[channel] += w;
      sum += w;
    }
    if (sum <= 0.0) {
      fail("ParseError", "scout line " + std::to_string(line_no) +
                             ": weights sum to zero");
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      std::cerr << "warning: scout " << scout.name << " weights sum to "
                << format_double(sum) << "; renormalizing\n";
    }
    for (auto& [channel, w] : scout.weights) w /= sum;
    scouts.push_back(std::move(scout));
  }
  if (scouts.empty()) fail("ParseError", "scout file defines no scouts");
  return scouts;
}

std::vector<ScoutSpec> load_scout_file(const std::filesystem::path& path) {
  return parse_scout_text(read_file(path));
}

std::vector<ScoutSpec> default_scouts() {
  const auto neighborhood = [](std::string name, std::string center,
                               std::vector<std::string> around) {
    ScoutSpec s;
    s.name = std::move(name);
    s.weights[std::move(center)] = 0.4;
    for (auto& ch : around) s.weights[std::move(ch)] = 0.15;
    return s;
  };
  return {
      neighborhood("L1", "FC3", {"FC1", "FC5", "C3", "F3"}),
      neighborhood("L2", "C3", {"C1", "C5", "FC3", "CP3"}),
      neighborhood("L3", "CP3", {"CP1", "CP5", "C3", "P3"}),
      neighborhood("L4", "C1", {"Cz", "C3", "FC1", "CP1"}),
      neighborhood("L5", "C5", {"C3", "T7", "FC5", "CP5"}),
      neighborhood("R1", "FC4", {"FC2", "FC6", "C4", "F4"}),
      neighborhood("R2", "C2", {"Cz", "C4", "FC2", "CP2"}),
      neighborhood("R3", "CP4", {"CP2", "CP6", "C4", "P4"}),
      neighborhood("R4", "C6", {"C4", "T8", "FC6", "CP6"}),
      neighborhood("R5", "C4", {"C2", "C6", "FC4", "CP4"}),
  };
}

const ScoutSpec& find_scout(const std::vector<ScoutSpec>& scouts,
                            const std::string& name) {
  for (const ScoutSpec& s : scouts) {
    if (s.name == name) return s;
  }
  fail("UnknownChannel", "no scout named " + name);
}

}  // namespace mibci::dsp
