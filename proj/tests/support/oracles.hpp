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

#ifndef MIBCI_TESTS_SUPPORT_ORACLES_HPP
#define MIBCI_TESTS_SUPPORT_ORACLES_HPP

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "mibci/layers.hpp"
#include "mibci/tensor.hpp"

namespace mibci::testsupport {

// Reference convolution: the five nested loops straight from the operation
// definition, no im2col, no BLAS.
inline nn::Tensor<double> conv2d_oracle(const nn::Tensor<double>& x,
                                        const nn::Tensor<double>& w,
                                        const nn::Tensor<double>& b, int stride,
                                        int pad) {
  const int in_ch = x.dims[0], h = x.dims[1], width = x.dims[2];
  const int out_ch = w.dims[0], k = w.dims[2];
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (width + 2 * pad - k) / stride + 1;
  nn::Tensor<double> out({out_ch, oh, ow});
  for (int o = 0; o < out_ch; ++o) {
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        double acc = b.values[o];
        for (int c = 0; c < in_ch; ++c) {
          for (int u = 0; u < k; ++u) {
            for (int v = 0; v < k; ++v) {
              const int si = i * stride + u - pad;
              const int sj = j * stride + v - pad;
              if (si < 0 || si >= h || sj < 0 || sj >= width) continue;
              const Eigen::Index wi =
                  ((static_cast<Eigen::Index>(o) * in_ch + c) * k + u) * k + v;
              acc += w.values[wi] * x.at(c, si, sj);
            }
          }
        }
        out.at(o, i, j) = acc;
      }
    }
  }
  return out;
}

// Single-bin DFT amplitude of a real series at f_hz (2/N-scaled so a pure
// unit sinusoid at a bin frequency reads ~1).
inline double dft_amplitude(const Eigen::VectorXd& x, double f_hz,
                            double rate_hz) {
  std::complex<double> acc(0.0, 0.0);
  const double w = 2.0 * std::numbers::pi * f_hz / rate_hz;
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    acc += x[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

// Fresh scratch directory under the system temp root.
inline std::filesystem::path make_temp_dir(const std::string& tag) {
  std::random_device rd;
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("mibci_" + tag + "_" + std::to_string(rd()));
  std::filesystem::create_directories(dir);
  return dir;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) : path(make_temp_dir(tag)) {}
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace mibci::testsupport

#endif  // MIBCI_TESTS_SUPPORT_ORACLES_HPP
