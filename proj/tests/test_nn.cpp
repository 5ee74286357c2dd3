// Copyright 2026 The privrep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "doctest.h"
#include "privrep/nn.hpp"
#include "privrep/rng.hpp"
#include "support/oracles.hpp"

using namespace privrep;

namespace {

// Single linear layer with explicit weights (row-major) and bias.
Mlp linear_model(int in, int out, const Vec& weights, const Vec& bias) {
  Mlp m(MlpSpec{{in, out}, Activation::Tanh, false, false});
  auto& p = m.params();
  std::copy(weights.begin(), weights.end(), p.begin());
  std::copy(bias.begin(), bias.end(), p.begin() + weights.size());
  return m;
}

}  // namespace

TEST_CASE("forward: identity weights reproduce the input") {
  const Mlp m = linear_model(2, 2, {1, 0, 0, 1}, {0, 0});
  const Vec y = m.forward(Vec{1.0, 2.0});
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(2.0));
}

TEST_CASE("forward: zero weights yield the bias") {
  const Mlp m = linear_model(3, 2, Vec(6, 0.0), {0.5, -1.5});
  const Vec y = m.forward(Vec{9.0, 8.0, 7.0});
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(y[1] == doctest::Approx(-1.5));
}

TEST_CASE("forward: dimension mismatch throws") {
  const Mlp m = linear_model(2, 2, {1, 0, 0, 1}, {0, 0});
  CHECK_THROWS_AS(m.forward(Vec{1.0}), DimensionMismatch);
}

TEST_CASE("forward: 2-layer tanh net matches an independent evaluation") {
  Rng rng(31);
  Rng init = rng.substream("init");
  Mlp m = Mlp::initialized(MlpSpec{{3, 4, 2}, Activation::Tanh, true, false},
                           init);
  // pull the weights into explicit matrices for the oracle
  std::vector<Vec> w1(4, Vec(3)), w2(2, Vec(4));
  Vec b1(4), b2(2);
  const auto& p = m.params();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 3; ++c) w1[r][c] = p[m.weight_offset(0) + r * 3 + c];
  for (int r = 0; r < 4; ++r) b1[r] = p[m.bias_offset(0) + r];
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) w2[r][c] = p[m.weight_offset(1) + r * 4 + c];
  for (int r = 0; r < 2; ++r) b2[r] = p[m.bias_offset(1) + r];

  for (int trial = 0; trial < 10; ++trial) {
    Vec x = {rng.normal(), rng.normal(), rng.normal()};
    const Vec got = m.forward(x);
    const Vec want = oracles::two_layer_tanh_forward(w1, b1, w2, b2, x, true);
    for (int i = 0; i < 2; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("parameter count matches sum of layer sizes") {
  const Mlp m(MlpSpec{{20, 32, 16}, Activation::Tanh, false, false});
  CHECK(m.num_params() == 20 * 32 + 32 + 32 * 16 + 16);
}

TEST_CASE("grad: linear MSE model matches hand computation") {
  // y = w x + b, x = 1, target 0, per-sample loss (y - t)^2
  Mlp m = linear_model(1, 1, {0.7}, {0.1});
  const std::vector<Vec> xs = {Vec{1.0}};
  const std::vector<Vec> ts = {Vec{0.0}};
  const LossGrad lg = mse_loss_grad(m, xs, ts, Exec::Serial);
  const double y = 0.8;
  CHECK(lg.loss == doctest::Approx(y * y));
  CHECK(lg.grad[0] == doctest::Approx(2 * y * 1.0));  // d/dw
  CHECK(lg.grad[1] == doctest::Approx(2 * y));        // d/db
}

TEST_CASE("grad: constant loss has zero gradient") {
  // zero input and matching bias keep the loss at its minimum
  Mlp m = linear_model(1, 1, {0.3}, {0.0});
  const std::vector<Vec> xs = {Vec{0.0}};
  const std::vector<Vec> ts = {Vec{0.0}};
  const LossGrad lg = mse_loss_grad(m, xs, ts, Exec::Serial);
  CHECK(lg.loss == doctest::Approx(0.0));
  for (double g : lg.grad) CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("grad: cross entropy matches central finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Rng init = rng.substream("init", trial);
    Mlp m = Mlp::initialized(
        MlpSpec{{4, 5, 3}, trial % 2 ? Activation::Relu : Activation::Tanh,
                false, true},
        init);
    std::vector<Vec> xs;
    std::vector<int> ys;
    for (int i = 0; i < 6; ++i) {
      Vec x(4);
      for (double& v : x) v = rng.normal();
      xs.push_back(x);
      ys.push_back(static_cast<int>(rng.uniform_index(3)));
    }
    const LossGrad lg = ce_loss_grad(m, xs, ys, Exec::Serial);
    const Vec fd = oracles::finite_difference(
        [&] { return ce_loss_grad(m, xs, ys, Exec::Serial).loss; }, m.params());
    CHECK(oracles::grads_match(lg.grad, fd, 1e-4, 1e-6));
  }
}

TEST_CASE("step: SGD update") {
  OptimizerState opt = OptimizerState::sgd(0.1);
  Vec params = {1.0};
  opt.step(params, Vec{2.0});
  CHECK(params[0] == doctest::Approx(0.8));
}

TEST_CASE("step: first Adam update is a bias-corrected signed step") {
  OptimizerState opt = OptimizerState::adam(1e-3);
  Vec params = {0.0};
  opt.step(params, Vec{1.0});
  // mhat = 1, vhat = 1 after bias correction
  CHECK(params[0] == doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("step: zero gradient leaves SGD parameters unchanged") {
  OptimizerState opt = OptimizerState::sgd(0.5);
  Vec params = {3.0, -2.0};
  opt.step(params, Vec{0.0, 0.0});
  CHECK(params[0] == doctest::Approx(3.0));
  CHECK(params[1] == doctest::Approx(-2.0));
}

TEST_CASE("step: shape mismatch throws") {
  OptimizerState opt = OptimizerState::sgd(0.1);
  Vec params = {1.0, 2.0};
  CHECK_THROWS_AS(opt.step(params, Vec{1.0}), DimensionMismatch);
}

TEST_CASE("softmax-output heads and logits heads give identical CE gradients") {
  Rng rng(9);
  Rng i1 = rng.substream("a"), i2 = rng.substream("a");
  Mlp soft = Mlp::initialized(MlpSpec{{3, 4, 2}, Activation::Relu, false, true},
                              i1);
  Mlp logits = Mlp::initialized(
      MlpSpec{{3, 4, 2}, Activation::Relu, false, false}, i2);
  REQUIRE(soft.params() == logits.params());
  std::vector<Vec> xs = {Vec{0.3, -0.2, 0.9}, Vec{-1.0, 0.4, 0.1}};
  std::vector<int> ys = {1, 0};
  const LossGrad a = ce_loss_grad(soft, xs, ys, Exec::Serial);
  const LossGrad b = ce_loss_grad(logits, xs, ys, Exec::Serial);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  CHECK(oracles::grads_match(a.grad, b.grad, 1e-10, 1e-12));
}

TEST_CASE("non-finite parameters are detected") {
  Mlp m = linear_model(1, 1, {std::nan("")}, {0.0});
  CHECK_FALSE(m.finite());
}
