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

#ifndef MIBCI_MODEL_HPP
#define MIBCI_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "mibci/dsp.hpp"
#include "mibci/layers.hpp"
#include "mibci/tensor.hpp"

namespace mibci::nn {

struct Conv2dSpec {
  int in_ch, out_ch, kernel, stride, pad;
  bool operator==(const Conv2dSpec&) const = default;
};
struct MaxPoolSpec {
  int kernel, stride;
  bool operator==(const MaxPoolSpec&) const = default;
};
struct ReluSpec {
  bool operator==(const ReluSpec&) const = default;
};
struct DropoutSpec {
  double rate;
  bool operator==(const DropoutSpec&) const = default;
};
struct FlattenSpec {
  bool operator==(const FlattenSpec&) const = default;
};
struct DenseSpec {
  int in, out;
  bool operator==(const DenseSpec&) const = default;
};
struct SoftmaxSpec {
  bool operator==(const SoftmaxSpec&) const = default;
};

using LayerSpec = std::variant<Conv2dSpec, MaxPoolSpec, ReluSpec, DropoutSpec,
                               FlattenSpec, DenseSpec, SoftmaxSpec>;

enum class Mode { kTrain, kEval };

template <typename Scalar>
struct Model {
  std::vector<LayerSpec> layers;
  // One slot per layer; empty tensors for parameterless layers.
  std::vector<Tensor<Scalar>> weights;
  std::vector<Tensor<Scalar>> biases;
  std::vector<int> input_dims;  // (channels, height, width)
  std::vector<std::string> class_names;
  dsp::NormStats norm_stats;
  std::uint64_t rng_seed = 0;

  int n_classes() const { return static_cast<int>(class_names.size()); }
};

template <typename Scalar>
struct Gradients {
  std::vector<Tensor<Scalar>> weights;
  std::vector<Tensor<Scalar>> biases;
};

template <typename Scalar>
struct ForwardCache {
  std::vector<Tensor<Scalar>> inputs;  // input of each layer
  std::vector<std::vector<Eigen::Index>> pool_winners;
  std::vector<Tensor<Scalar>> dropout_masks;
  Tensor<Scalar> probabilities;
};

// Walks the layer stack symbolically and returns the output dims of each
// layer. Throws ShapeMismatch on any incompatibility, a missing or
// non-terminal Softmax, or a dropout rate outside [0, 1).
std::vector<std::vector<int>> check_shapes(const std::vector<LayerSpec>& layers,
                                           const std::vector<int>& input_dims);

// The default stack for 1x23x64 inputs: six 3x3 convolutions, two 2x2 max
// pools, one flatten, two dense stages with dropout, terminal softmax.
std::vector<LayerSpec> default_architecture(const std::vector<int>& input_dims,
                                            int n_classes);

// Parses an architecture description, one layer per token:
// conv:<in>:<out>:<k>:<stride>:<pad> pool:<k>:<stride> relu dropout:<rate>
// flatten dense:<in>:<out> softmax
std::vector<LayerSpec> parse_architecture(const std::vector<std::string>& tokens);
std::vector<std::string> architecture_to_tokens(const std::vector<LayerSpec>& layers);

template <typename Scalar>
Model<Scalar> init_params(std::vector<LayerSpec> layers,
                          std::vector<int> input_dims,
                          std::vector<std::string> class_names,
                          std::uint64_t seed) {
  check_shapes(layers, input_dims);
  Model<Scalar> m;
  m.layers = std::move(layers);
  m.input_dims = std::move(input_dims);
  m.class_names = std::move(class_names);
  m.rng_seed = seed;
  m.weights.resize(m.layers.size());
  m.biases.resize(m.layers.size());

  Rng rng(seed);
  const auto he_fill = [&rng](Tensor<Scalar>& t, int fan_in) {
    const double stddev = std::sqrt(2.0 / fan_in);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      t.values[i] = static_cast<Scalar>(rng.next_gauss() * stddev);
    }
  };
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    if (const auto* conv = std::get_if<Conv2dSpec>(&m.layers[li])) {
      m.weights[li] = Tensor<Scalar>(
          {conv->out_ch, conv->in_ch, conv->kernel, conv->kernel});
      he_fill(m.weights[li], conv->in_ch * conv->kernel * conv->kernel);
      m.biases[li] = Tensor<Scalar>({conv->out_ch});
    } else if (const auto* dense = std::get_if<DenseSpec>(&m.layers[li])) {
      m.weights[li] = Tensor<Scalar>({dense->out, dense->in});
      he_fill(m.weights[li], dense->in);
      m.biases[li] = Tensor<Scalar>({dense->out});
    }
  }
  return m;
}

// Runs the stack and returns class probabilities. Train mode applies
// dropout from `rng`; eval mode is deterministic. When `cache` is given the
// per-layer inputs needed by backward() are recorded.
template <typename Scalar>
Tensor<Scalar> forward(const Model<Scalar>& model, const Tensor<Scalar>& image,
                       Mode mode, Rng* rng = nullptr,
                       ForwardCache<Scalar>* cache = nullptr) {
  if (image.dims != model.input_dims) {
    fail("ShapeMismatch", "input " + dims_to_string(image.dims) +
                              " vs model " + dims_to_string(model.input_dims));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pool_winners.assign(model.layers.size(), {});
    cache->dropout_masks.assign(model.layers.size(), {});
  }
  Tensor<Scalar> x = image;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    if (cache) cache->inputs.push_back(x);
    const LayerSpec& spec = model.layers[li];
    if (const auto* conv = std::get_if<Conv2dSpec>(&spec)) {
      x = conv2d_forward(x, model.weights[li], model.biases[li], conv->stride,
                         conv->pad);
    } else if (const auto* pool = std::get_if<MaxPoolSpec>(&spec)) {
      auto res = maxpool_forward(x, pool->kernel, pool->stride);
      if (cache) cache->pool_winners[li] = std::move(res.winners);
      x = std::move(res.output);
    } else if (std::holds_alternative<ReluSpec>(spec)) {
      x = relu_forward(x);
    } else if (const auto* drop = std::get_if<DropoutSpec>(&spec)) {
      if (mode == Mode::kTrain) {
        if (!rng) fail("ShapeMismatch", "train-mode forward needs an rng");
        auto [y, mask] = dropout_forward(x, drop->rate, true, *rng);
        if (cache) cache->dropout_masks[li] = std::move(mask);
        x = std::move(y);
      }
      // eval mode: identity
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      x = flatten(x);
    } else if (const auto* dense = std::get_if<DenseSpec>(&spec)) {
      x = dense_forward(x, model.weights[li], model.biases[li]);
    } else {  // Softmax, terminal by construction
      if (cache) cache->probabilities = softmax(x);
      return cache ? cache->probabilities : softmax(x);
    }
  }
  fail("ShapeMismatch", "model lacks a terminal softmax");
}

// Backpropagates the cross-entropy gradient through a cached forward pass.
template <typename Scalar>
Gradients<Scalar> backward(const Model<Scalar>& model,
                           const ForwardCache<Scalar>& cache, int label) {
  if (label < 0 || label >= model.n_classes()) {
    fail("ShapeMismatch", "label out of range");
  }
  Gradients<Scalar> grads;
  grads.weights.resize(model.layers.size());
  grads.biases.resize(model.layers.size());

  // d(loss)/d(logits) = p - onehot(label); softmax+CE collapse into this.
  Tensor<Scalar> g = cache.probabilities;
  g.values[label] -= Scalar(1);

  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const LayerSpec& spec = model.layers[li];
    const Tensor<Scalar>& x = cache.inputs[li];
    if (const auto* conv = std::get_if<Conv2dSpec>(&spec)) {
      auto cg = conv2d_backward(x, model.weights[li], g, conv->stride, conv->pad);
      grads.weights[li] = std::move(cg.weights);
      grads.biases[li] = std::move(cg.bias);
      g = std::move(cg.input);
    } else if (std::holds_alternative<MaxPoolSpec>(spec)) {
      g = maxpool_backward(x.dims, cache.pool_winners[li], g);
    } else if (std::holds_alternative<ReluSpec>(spec)) {
      g = relu_backward(x, g);
    } else if (std::holds_alternative<DropoutSpec>(spec)) {
      if (!cache.dropout_masks[li].empty()) {
        g = dropout_backward(cache.dropout_masks[li], g);
      }
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      g = unflatten(x.dims, g);
    } else if (std::holds_alternative<DenseSpec>(spec)) {
      auto dg = dense_backward(x, model.weights[li], g);
      grads.weights[li] = std::move(dg.weights);
      grads.biases[li] = std::move(dg.bias);
      g = std::move(dg.input);
    }
    // Softmax: already folded into the initial gradient.
  }
  return grads;
}

// Bit-exact binary serialization (magic MIBC, version, layer specs, header
// metadata, f64 parameters, trailing CRC-32).
// Throws: BadMagic, VersionMismatch, ChecksumMismatch, TruncatedFile, IoError.
void save_model(const Model<double>& model, const std::filesystem::path& path);
Model<double> load_model(const std::filesystem::path& path);
std::string serialize_model(const Model<double>& model);
Model<double> deserialize_model(std::string_view bytes);

}  // namespace mibci::nn

#endif  // MIBCI_MODEL_HPP
