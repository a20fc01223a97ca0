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

#ifndef MIBCI_TENSOR_HPP
#define MIBCI_TENSOR_HPP

#include <Eigen/Core>
#include <numeric>
#include <string>
#include <vector>

#include "mibci/errors.hpp"

namespace mibci::nn {

// Dense row-major tensor; dims is (channels, height, width) for feature maps
// or a single entry for flat feature vectors.
template <typename Scalar>
struct Tensor {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<int> dims;
  Vector values;

  Tensor() = default;
  explicit Tensor(std::vector<int> d) : dims(std::move(d)) {
    values = Vector::Zero(element_count(dims));
  }
  Tensor(std::vector<int> d, Vector v) : dims(std::move(d)), values(std::move(v)) {
    if (values.size() != element_count(dims)) {
      fail("ShapeMismatch", "tensor value count does not match dims");
    }
  }

  static Eigen::Index element_count(const std::vector<int>& d) {
    Eigen::Index n = 1;
    for (int x : d) {
      if (x <= 0) fail("ShapeMismatch", "non-positive tensor dimension");
      n *= x;
    }
    return d.empty() ? 0 : n;
  }

  Eigen::Index size() const { return values.size(); }
  bool empty() const { return dims.empty(); }

  Scalar& at(int c, int h, int w) {
    return values[(static_cast<Eigen::Index>(c) * dims[1] + h) * dims[2] + w];
  }
  Scalar at(int c, int h, int w) const {
    return values[(static_cast<Eigen::Index>(c) * dims[1] + h) * dims[2] + w];
  }

  bool same_shape(const Tensor& other) const { return dims == other.dims; }

  bool all_finite() const { return values.allFinite(); }
};

inline std::string dims_to_string(const std::vector<int>& dims) {
  std::string s = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(dims[i]);
  }
  return s + ")";
}

}  // namespace mibci::nn

#endif  // MIBCI_TENSOR_HPP
