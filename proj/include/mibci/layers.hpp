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

#ifndef MIBCI_LAYERS_HPP
#define MIBCI_LAYERS_HPP

#include <cmath>
#include <utility>

#include "mibci/rng.hpp"
#include "mibci/tensor.hpp"

namespace mibci::nn {

template <typename Scalar>
using MatrixRM =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline int conv_out_extent(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Unrolls x (in_ch, h, w) into a (in_ch*k*k) x (oh*ow) patch matrix with
// zero padding; the workhorse behind conv2d forward and both weight/input
// gradients.
template <typename Scalar>
MatrixRM<Scalar> im2col(const Tensor<Scalar>& x, int k, int stride, int pad,
                        int oh, int ow) {
  const int in_ch = x.dims[0], h = x.dims[1], w = x.dims[2];
  MatrixRM<Scalar> cols = MatrixRM<Scalar>::Zero(in_ch * k * k, oh * ow);
  for (int c = 0; c < in_ch; ++c) {
    for (int u = 0; u < k; ++u) {
      for (int v = 0; v < k; ++v) {
        const int row = (c * k + u) * k + v;
        for (int i = 0; i < oh; ++i) {
          const int src_i = i * stride + u - pad;
          if (src_i < 0 || src_i >= h) continue;
          for (int j = 0; j < ow; ++j) {
            const int src_j = j * stride + v - pad;
            if (src_j < 0 || src_j >= w) continue;
            cols(row, i * ow + j) = x.at(c, src_i, src_j);
          }
        }
      }
    }
  }
  return cols;
}

template <typename Scalar>
void col2im_add(const MatrixRM<Scalar>& cols, Tensor<Scalar>& x, int k,
                int stride, int pad, int oh, int ow) {
  const int in_ch = x.dims[0], h = x.dims[1], w = x.dims[2];
  for (int c = 0; c < in_ch; ++c) {
    for (int u = 0; u < k; ++u) {
      for (int v = 0; v < k; ++v) {
        const int row = (c * k + u) * k + v;
        for (int i = 0; i < oh; ++i) {
          const int src_i = i * stride + u - pad;
          if (src_i < 0 || src_i >= h) continue;
          for (int j = 0; j < ow; ++j) {
            const int src_j = j * stride + v - pad;
            if (src_j < 0 || src_j >= w) continue;
            x.at(c, src_i, src_j) += cols(row, i * ow + j);
          }
        }
      }
    }
  }
}

// weights dims (out_ch, in_ch, k, k); bias dims (out_ch).
template <typename Scalar>
Tensor<Scalar> conv2d_forward(const Tensor<Scalar>& x,
                              const Tensor<Scalar>& weights,
                              const Tensor<Scalar>& bias, int stride, int pad) {
  if (x.dims.size() != 3 || weights.dims.size() != 4 ||
      x.dims[0] != weights.dims[1] || bias.size() != weights.dims[0]) {
    fail("ShapeMismatch", "conv2d: input " + dims_to_string(x.dims) +
                              " vs weights " + dims_to_string(weights.dims));
  }
  const int out_ch = weights.dims[0], k = weights.dims[2];
  const int oh = conv_out_extent(x.dims[1], k, stride, pad);
  const int ow = conv_out_extent(x.dims[2], k, stride, pad);
  if (oh <= 0 || ow <= 0) fail("ShapeMismatch", "conv2d output would be empty");

  const MatrixRM<Scalar> cols = im2col(x, k, stride, pad, oh, ow);
  Eigen::Map<const MatrixRM<Scalar>> W(weights.values.data(), out_ch,
                                       weights.size() / out_ch);

  Tensor<Scalar> out({out_ch, oh, ow});
  Eigen::Map<MatrixRM<Scalar>> out_mat(out.values.data(), out_ch, oh * ow);
  out_mat.noalias() = W * cols;
  out_mat.colwise() += bias.values;
  return out;
}

template <typename Scalar>
struct Conv2dGrads {
  Tensor<Scalar> input;
  Tensor<Scalar> weights;
  Tensor<Scalar> bias;
};

template <typename Scalar>
Conv2dGrads<Scalar> conv2d_backward(const Tensor<Scalar>& x,
                                    const Tensor<Scalar>& weights,
                                    const Tensor<Scalar>& grad_out, int stride,
                                    int pad) {
  const int out_ch = weights.dims[0], k = weights.dims[2];
  const int oh = conv_out_extent(x.dims[1], k, stride, pad);
  const int ow = conv_out_extent(x.dims[2], k, stride, pad);
  if (grad_out.dims != std::vector<int>{out_ch, oh, ow}) {
    fail("ShapeMismatch",
         "conv2d backward: grad " + dims_to_string(grad_out.dims));
  }

  Eigen::Map<const MatrixRM<Scalar>> G(grad_out.values.data(), out_ch, oh * ow);
  Eigen::Map<const MatrixRM<Scalar>> W(weights.values.data(), out_ch,
                                       weights.size() / out_ch);
  const MatrixRM<Scalar> cols = im2col(x, k, stride, pad, oh, ow);

  Conv2dGrads<Scalar> g;
  g.weights = Tensor<Scalar>(weights.dims);
  Eigen::Map<MatrixRM<Scalar>> gw(g.weights.values.data(), out_ch,
                                  weights.size() / out_ch);
  gw.noalias() = G * cols.transpose();

  g.bias = Tensor<Scalar>({out_ch});
  g.bias.values = G.rowwise().sum();

  g.input = Tensor<Scalar>(x.dims);
  const MatrixRM<Scalar> gcols = W.transpose() * G;
  col2im_add(gcols, g.input, k, stride, pad, oh, ow);
  return g;
}

template <typename Scalar>
struct MaxPoolResult {
  Tensor<Scalar> output;
  // Linear index into the input of each window's winner; ties go to the
  // lowest linear index so the backward route is deterministic.
  std::vector<Eigen::Index> winners;
};

template <typename Scalar>
MaxPoolResult<Scalar> maxpool_forward(const Tensor<Scalar>& x, int k,
                                      int stride) {
  if (x.dims.size() != 3) fail("ShapeMismatch", "maxpool expects a 3-d input");
  const int ch = x.dims[0];
  const int oh = (x.dims[1] - k) / stride + 1;
  const int ow = (x.dims[2] - k) / stride + 1;
  if (oh <= 0 || ow <= 0) fail("ShapeMismatch", "maxpool output would be empty");

  MaxPoolResult<Scalar> res;
  res.output = Tensor<Scalar>({ch, oh, ow});
  res.winners.resize(static_cast<std::size_t>(ch) * oh * ow);
  Eigen::Index out_idx = 0;
  for (int c = 0; c < ch; ++c) {
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        Scalar best = x.at(c, i * stride, j * stride);
        Eigen::Index best_idx =
            (static_cast<Eigen::Index>(c) * x.dims[1] + i * stride) * x.dims[2] +
            j * stride;
        for (int u = 0; u < k; ++u) {
          for (int v = 0; v < k; ++v) {
            const Scalar val = x.at(c, i * stride + u, j * stride + v);
            if (val > best) {
              best = val;
              best_idx = (static_cast<Eigen::Index>(c) * x.dims[1] +
                          i * stride + u) * x.dims[2] + j * stride + v;
            }
          }
        }
        res.output.values[out_idx] = best;
        res.winners[out_idx] = best_idx;
        ++out_idx;
      }
    }
  }
  return res;
}

template <typename Scalar>
Tensor<Scalar> maxpool_backward(const std::vector<int>& input_dims,
                                const std::vector<Eigen::Index>& winners,
                                const Tensor<Scalar>& grad_out) {
  Tensor<Scalar> gx(input_dims);
  if (winners.size() != static_cast<std::size_t>(grad_out.size())) {
    fail("ShapeMismatch", "maxpool backward: winner count mismatch");
  }
  for (Eigen::Index i = 0; i < grad_out.size(); ++i) {
    gx.values[winners[i]] += grad_out.values[i];
  }
  return gx;
}

template <typename Scalar>
Tensor<Scalar> relu_forward(const Tensor<Scalar>& x) {
  return {x.dims, x.values.cwiseMax(Scalar(0))};
}

template <typename Scalar>
Tensor<Scalar> relu_backward(const Tensor<Scalar>& x,
                             const Tensor<Scalar>& grad_out) {
  if (!x.same_shape(grad_out)) fail("ShapeMismatch", "relu backward");
  Tensor<Scalar> gx(x.dims);
  gx.values = ((x.values.array() > Scalar(0)).template cast<Scalar>() *
               grad_out.values.array())
                  .matrix();
  return gx;
}

// weights dims (out, in), row-major; bias dims (out).
template <typename Scalar>
Tensor<Scalar> dense_forward(const Tensor<Scalar>& x,
                             const Tensor<Scalar>& weights,
                             const Tensor<Scalar>& bias) {
  const int out = weights.dims[0], in = weights.dims[1];
  if (x.size() != in || bias.size() != out) {
    fail("ShapeMismatch", "dense: input " + dims_to_string(x.dims) +
                              " vs weights " + dims_to_string(weights.dims));
  }
  Eigen::Map<const MatrixRM<Scalar>> W(weights.values.data(), out, in);
  Tensor<Scalar> y({out});
  y.values.noalias() = W * x.values;
  y.values += bias.values;
  return y;
}

template <typename Scalar>
struct DenseGrads {
  Tensor<Scalar> input;
  Tensor<Scalar> weights;
  Tensor<Scalar> bias;
};

template <typename Scalar>
DenseGrads<Scalar> dense_backward(const Tensor<Scalar>& x,
                                  const Tensor<Scalar>& weights,
                                  const Tensor<Scalar>& grad_out) {
  const int out = weights.dims[0], in = weights.dims[1];
  if (grad_out.size() != out || x.size() != in) {
    fail("ShapeMismatch", "dense backward");
  }
  Eigen::Map<const MatrixRM<Scalar>> W(weights.values.data(), out, in);
  DenseGrads<Scalar> g;
  g.weights = Tensor<Scalar>(weights.dims);
  Eigen::Map<MatrixRM<Scalar>> gw(g.weights.values.data(), out, in);
  gw.noalias() = grad_out.values * x.values.transpose();
  g.bias = Tensor<Scalar>({out});
  g.bias.values = grad_out.values;
  g.input = Tensor<Scalar>({in});
  g.input.values.noalias() = W.transpose() * grad_out.values;
  return g;
}

template <typename Scalar>
Tensor<Scalar> flatten(const Tensor<Scalar>& x) {
  return {{static_cast<int>(x.size())}, x.values};
}

template <typename Scalar>
Tensor<Scalar> unflatten(const std::vector<int>& dims, const Tensor<Scalar>& x) {
  return {dims, x.values};
}

// Train mode: each activation is zeroed independently with probability rate
// and survivors are scaled by 1/(1-rate). Eval mode is the identity.
template <typename Scalar>
std::pair<Tensor<Scalar>, Tensor<Scalar>> dropout_forward(
    const Tensor<Scalar>& x, double rate, bool train, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) fail("ShapeMismatch", "dropout rate");
  Tensor<Scalar> mask(x.dims);
  if (!train || rate == 0.0) {
    mask.values.setOnes();
    return {x, mask};
  }
  const Scalar scale = Scalar(1.0 / (1.0 - rate));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    mask.values[i] = rng.next_double() < rate ? Scalar(0) : scale;
  }
  Tensor<Scalar> y(x.dims);
  y.values = x.values.cwiseProduct(mask.values);
  return {std::move(y), std::move(mask)};
}

template <typename Scalar>
Tensor<Scalar> dropout_backward(const Tensor<Scalar>& mask,
                                const Tensor<Scalar>& grad_out) {
  if (!mask.same_shape(grad_out)) fail("ShapeMismatch", "dropout backward");
  return {mask.dims, mask.values.cwiseProduct(grad_out.values)};
}

template <typename Scalar>
Tensor<Scalar> softmax(const Tensor<Scalar>& logits) {
  Tensor<Scalar> p(logits.dims);
  const Scalar shift = logits.values.maxCoeff();
  p.values = (logits.values.array() - shift).exp();
  p.values /= p.values.sum();
  return p;
}

template <typename Scalar>
std::pair<Scalar, Tensor<Scalar>> softmax_cross_entropy(
    const Tensor<Scalar>& logits, int label) {
  if (label < 0 || label >= logits.size()) {
    fail("ShapeMismatch", "label " + std::to_string(label) + " out of range");
  }
  Tensor<Scalar> p = softmax(logits);
  const Scalar loss = -std::log(p.values[label]);
  Tensor<Scalar> grad = p;
  grad.values[label] -= Scalar(1);
  return {loss, std::move(grad)};
}

}  // namespace mibci::nn

#endif  // MIBCI_LAYERS_HPP
