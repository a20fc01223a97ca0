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

#ifndef MIBCI_ADAM_HPP
#define MIBCI_ADAM_HPP

#include "mibci/model.hpp"

namespace mibci::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  std::vector<Tensor<Scalar>> m_weights, v_weights;
  std::vector<Tensor<Scalar>> m_biases, v_biases;
  long step = 0;  // t; incremented by adam_step before the update

  static AdamState zero_like(const Model<Scalar>& model) {
    AdamState s;
    const auto zero = [](const std::vector<Tensor<Scalar>>& like) {
      std::vector<Tensor<Scalar>> out;
      out.reserve(like.size());
      for (const Tensor<Scalar>& t : like) {
        out.push_back(t.empty() ? Tensor<Scalar>() : Tensor<Scalar>(t.dims));
      }
      return out;
    };
    s.m_weights = zero(model.weights);
    s.v_weights = zero(model.weights);
    s.m_biases = zero(model.biases);
    s.v_biases = zero(model.biases);
    return s;
  }
};

template <typename Scalar>
void adam_update_tensor(Tensor<Scalar>& param, const Tensor<Scalar>& grad,
                        Tensor<Scalar>& m, Tensor<Scalar>& v,
                        const AdamConfig& cfg, long t) {
  if (!param.same_shape(grad)) fail("ShapeMismatch", "adam: grad shape");
  m.values = cfg.beta1 * m.values + (1.0 - cfg.beta1) * grad.values;
  v.values = cfg.beta2 * v.values +
             (1.0 - cfg.beta2) * grad.values.cwiseProduct(grad.values);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  param.values.array() -=
      cfg.learning_rate * (m.values.array() / bc1) /
      ((v.values.array() / bc2).sqrt() + cfg.epsilon);
}

// One Adam step over every parameter tensor of the model.
template <typename Scalar>
void adam_step(Model<Scalar>& model, const Gradients<Scalar>& grads,
               AdamState<Scalar>& state, const AdamConfig& cfg) {
  ++state.step;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    if (model.weights[li].empty()) continue;
    adam_update_tensor(model.weights[li], grads.weights[li],
                       state.m_weights[li], state.v_weights[li], cfg,
                       state.step);
    adam_update_tensor(model.biases[li], grads.biases[li], state.m_biases[li],
                       state.v_biases[li], cfg, state.step);
  }
}

}  // namespace mibci::nn

#endif  // MIBCI_ADAM_HPP
