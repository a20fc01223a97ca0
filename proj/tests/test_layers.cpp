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

#include <doctest.h>

#include <cmath>

#include "mibci/adam.hpp"
#include "mibci/layers.hpp"
#include "mibci/rng.hpp"
#include "support/oracles.hpp"

using namespace mibci;
using nn::Tensor;

namespace {

Tensor<double> random_tensor(std::vector<int> dims, Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(dims));
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    t.values[i] = scale * rng.next_gauss();
  }
  return t;
}

double max_rel_err(const Tensor<double>& a, const Tensor<double>& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max(1e-6, std::abs(a.values[i]) + std::abs(b.values[i]));
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
  Tensor<double> t({2, 3, 4});
  CHECK(t.size() == 24);
  t.at(1, 2, 3) = 5.0;
  CHECK(t.values[23] == 5.0);
  CHECK(t.all_finite());
  CHECK_THROWS_WITH_AS(Tensor<double>({2, 0, 4}),
                       doctest::Contains("ShapeMismatch"), Error);
  CHECK_THROWS_WITH_AS(
      Tensor<double>({2}, Eigen::Vector3d(1, 2, 3)),
      doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("conv2d identity and full-sum examples") {
  Tensor<double> ones({1, 3, 3});
  ones.values.setOnes();
  Tensor<double> k1({1, 1, 1, 1});
  k1.values[0] = 1.0;
  Tensor<double> b0({1});
  const Tensor<double> id = nn::conv2d_forward(ones, k1, b0, 1, 0);
  CHECK(id.dims == std::vector<int>{1, 3, 3});
  CHECK((id.values.array() == 1.0).all());

  Tensor<double> x({1, 2, 2});
  x.values << 1, 2, 3, 4;
  Tensor<double> k2({1, 1, 2, 2});
  k2.values.setOnes();
  const Tensor<double> sum = nn::conv2d_forward(x, k2, b0, 1, 0);
  CHECK(sum.dims == std::vector<int>{1, 1, 1});
  CHECK(sum.values[0] == 10.0);
}

TEST_CASE("conv2d matches the naive loop oracle on random shapes") {
  Rng rng(11);
  for (int iter = 0; iter < 25; ++iter) {
    const int in_ch = 1 + static_cast<int>(rng.next_below(3));
    const int out_ch = 1 + static_cast<int>(rng.next_below(4));
    const int k = 1 + static_cast<int>(rng.next_below(3));
    const int stride = 1 + static_cast<int>(rng.next_below(2));
    const int pad = static_cast<int>(rng.next_below(2));
    const int h = k + static_cast<int>(rng.next_below(6));
    const int w = k + static_cast<int>(rng.next_below(6));

    const Tensor<double> x = random_tensor({in_ch, h, w}, rng);
    const Tensor<double> wt = random_tensor({out_ch, in_ch, k, k}, rng);
    const Tensor<double> b = random_tensor({out_ch}, rng);
    const Tensor<double> fast = nn::conv2d_forward(x, wt, b, stride, pad);
    const Tensor<double> slow = testsupport::conv2d_oracle(x, wt, b, stride, pad);
    REQUIRE(fast.dims == slow.dims);
    CHECK((fast.values - slow.values).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("conv2d gradients pass finite-difference checks") {
  Rng rng(17);
  constexpr double h_step = 1e-6;
  for (int iter = 0; iter < 8; ++iter) {
    const int in_ch = 1 + static_cast<int>(rng.next_below(2));
    const int out_ch = 1 + static_cast<int>(rng.next_below(3));
    const int k = 1 + static_cast<int>(rng.next_below(3));
    const int stride = 1 + static_cast<int>(rng.next_below(2));
    const int pad = static_cast<int>(rng.next_below(2));
    const int hh = k + 2, ww = k + 3;

    Tensor<double> x = random_tensor({in_ch, hh, ww}, rng);
    Tensor<double> wt = random_tensor({out_ch, in_ch, k, k}, rng);
    Tensor<double> b = random_tensor({out_ch}, rng);
    const Tensor<double> out = nn::conv2d_forward(x, wt, b, stride, pad);
    const Tensor<double> c = random_tensor(out.dims, rng);  // L = <c, out>

    const auto loss = [&] {
      return c.values.dot(nn::conv2d_forward(x, wt, b, stride, pad).values);
    };
    const nn::Conv2dGrads<double> g = nn::conv2d_backward(x, wt, c, stride, pad);

    const auto fd = [&](Tensor<double>& param) {
      Tensor<double> grad(param.dims);
      for (Eigen::Index i = 0; i < param.size(); ++i) {
        const double keep = param.values[i];
        param.values[i] = keep + h_step;
        const double up = loss();
        param.values[i] = keep - h_step;
        const double down = loss();
        param.values[i] = keep;
        grad.values[i] = (up - down) / (2.0 * h_step);
      }
      return grad;
    };
    CHECK(max_rel_err(fd(wt), g.weights) < 1e-4);
    CHECK(max_rel_err(fd(b), g.bias) < 1e-4);
    CHECK(max_rel_err(fd(x), g.input) < 1e-4);
  }
}

TEST_CASE("dense gradients pass finite-difference checks") {
  Rng rng(23);
  constexpr double h_step = 1e-6;
  for (int iter = 0; iter < 8; ++iter) {
    const int in = 2 + static_cast<int>(rng.next_below(8));
    const int out = 1 + static_cast<int>(rng.next_below(6));
    Tensor<double> x = random_tensor({in}, rng);
    Tensor<double> wt = random_tensor({out, in}, rng);
    Tensor<double> b = random_tensor({out}, rng);
    const Tensor<double> c = random_tensor({out}, rng);

    const auto loss = [&] {
      return c.values.dot(nn::dense_forward(x, wt, b).values);
    };
    const nn::DenseGrads<double> g = nn::dense_backward(x, wt, c);
    const auto fd = [&](Tensor<double>& param) {
      Tensor<double> grad(param.dims);
      for (Eigen::Index i = 0; i < param.size(); ++i) {
        const double keep = param.values[i];
        param.values[i] = keep + h_step;
        const double up = loss();
        param.values[i] = keep - h_step;
        const double down = loss();
        param.values[i] = keep;
        grad.values[i] = (up - down) / (2.0 * h_step);
      }
      return grad;
    };
    CHECK(max_rel_err(fd(wt), g.weights) < 1e-4);
    CHECK(max_rel_err(fd(b), g.bias) < 1e-4);
    CHECK(max_rel_err(fd(x), g.input) < 1e-4);
  }
}

TEST_CASE("maxpool picks maxima and routes gradient to one winner") {
  Tensor<double> x({1, 2, 2});
  x.values << 1, 2, 3, 4;
  const auto res = nn::maxpool_forward(x, 2, 2);
  CHECK(res.output.values[0] == 4.0);
  CHECK(res.winners == std::vector<Eigen::Index>{3});

  Tensor<double> g({1, 1, 1});
  g.values[0] = 2.5;
  const Tensor<double> gx = nn::maxpool_backward(x.dims, res.winners, g);
  CHECK(gx.values[3] == 2.5);
  CHECK(gx.values.sum() == 2.5);

  Tensor<double> flat({1, 2, 2});
  flat.values.setConstant(7.0);  // tie: lowest linear index wins
  CHECK(nn::maxpool_forward(flat, 2, 2).winners ==
        std::vector<Eigen::Index>{0});
}

TEST_CASE("relu masks forward and backward") {
  Tensor<double> x({4});
  x.values << -1.0, 0.0, 2.0, -3.0;
  const Tensor<double> y = nn::relu_forward(x);
  CHECK(y.values[0] == 0.0);
  CHECK(y.values[2] == 2.0);
  Tensor<double> g({4});
  g.values.setOnes();
  const Tensor<double> gx = nn::relu_backward(x, g);
  CHECK(gx.values[0] == 0.0);
  CHECK(gx.values[1] == 0.0);  // gradient at exactly 0 is 0
  CHECK(gx.values[2] == 1.0);
}

TEST_CASE("dropout identity at rate 0 and unbiased scaling") {
  Rng rng(31);
  Tensor<double> x({100});
  x.values.setConstant(3.0);
  const auto [y0, m0] = nn::dropout_forward(x, 0.0, true, rng);
  CHECK((y0.values - x.values).norm() == 0.0);

  double sum = 0.0;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    const auto [y, mask] = nn::dropout_forward(x, 0.5, true, rng);
    sum += y.values.mean();
  }
  CHECK(std::abs(sum / kDraws - 3.0) / 3.0 < 0.02);

  const auto [ye, me] = nn::dropout_forward(x, 0.5, false, rng);
  CHECK((ye.values - x.values).norm() == 0.0);  // eval mode is identity
}

TEST_CASE("softmax examples and properties") {
  Tensor<double> z({3});
  z.values.setZero();
  const auto [loss, grad] = nn::softmax_cross_entropy(z, 0);
  CHECK(loss == doctest::Approx(std::log(3.0)));
  CHECK(grad.values[0] == doctest::Approx(-2.0 / 3.0));
  CHECK(grad.values[1] == doctest::Approx(1.0 / 3.0));

  Tensor<double> big({2});
  big.values << 1000.0, 0.0;
  const auto [stable_loss, stable_grad] = nn::softmax_cross_entropy(big, 0);
  CHECK(stable_loss == doctest::Approx(0.0));
  CHECK(std::isfinite(stable_grad.values[0]));

  Rng rng(37);
  for (int iter = 0; iter < 20; ++iter) {
    Tensor<double> logits = random_tensor({5}, rng, 3.0);
    const Tensor<double> p = nn::softmax(logits);
    CHECK((p.values.array() > 0.0).all());
    CHECK(std::abs(p.values.sum() - 1.0) < 1e-12);

    Tensor<double> shifted = logits;
    shifted.values.array() += 17.25;
    CHECK((nn::softmax(shifted).values - p.values).lpNorm<Eigen::Infinity>() <
          1e-12);

    // Finite-difference check of the cross-entropy gradient.
    const int label = static_cast<int>(rng.next_below(5));
    const auto [l0, g] = nn::softmax_cross_entropy(logits, label);
    constexpr double h_step = 1e-6;
    for (Eigen::Index i = 0; i < 5; ++i) {
      Tensor<double> up = logits, down = logits;
      up.values[i] += h_step;
      down.values[i] -= h_step;
      const double fd = (nn::softmax_cross_entropy(up, label).first -
                         nn::softmax_cross_entropy(down, label).first) /
                        (2.0 * h_step);
      CHECK(std::abs(fd - g.values[i]) < 1e-6);
    }
  }
}

TEST_CASE("flatten and unflatten round-trip") {
  Rng rng(43);
  const Tensor<double> x = random_tensor({2, 3, 5}, rng);
  const Tensor<double> flat = nn::flatten(x);
  CHECK(flat.dims == std::vector<int>{30});
  const Tensor<double> back = nn::unflatten(x.dims, flat);
  CHECK(back.dims == x.dims);
  CHECK((back.values - x.values).norm() == 0.0);
}

TEST_CASE("adam matches a scalar reference and ignores zero gradients") {
  // Scalar reference: two hand-stepped updates.
  nn::AdamConfig cfg;
  cfg.learning_rate = 0.1;
  double m = 0.0, v = 0.0, param_ref = 1.0;
  const double grads[2] = {0.5, -0.25};
  for (int t = 1; t <= 2; ++t) {
    const double g = grads[t - 1];
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    param_ref -= cfg.learning_rate * (m / (1 - std::pow(cfg.beta1, t))) /
                 (std::sqrt(v / (1 - std::pow(cfg.beta2, t))) + cfg.epsilon);
  }

  Tensor<double> param({1});
  param.values[0] = 1.0;
  Tensor<double> ms({1}), vs({1});
  for (int t = 1; t <= 2; ++t) {
    Tensor<double> g({1});
    g.values[0] = grads[t - 1];
    nn::adam_update_tensor(param, g, ms, vs, cfg, t);
  }
  CHECK(std::abs(param.values[0] - param_ref) < 1e-12);

  // First step from zero state approximates -lr * sign(g).
  Tensor<double> p2({1});
  Tensor<double> m2({1}), v2({1});
  Tensor<double> g2({1});
  g2.values[0] = 0.3;
  nn::adam_update_tensor(p2, g2, m2, v2, cfg, 1);
  CHECK(p2.values[0] == doctest::Approx(-cfg.learning_rate).epsilon(1e-6));

  // Zero gradient leaves the parameter unchanged.
  Tensor<double> p3({1});
  p3.values[0] = 42.0;
  Tensor<double> m3({1}), v3({1}), g3({1});
  nn::adam_update_tensor(p3, g3, m3, v3, cfg, 1);
  CHECK(p3.values[0] == 42.0);
}
