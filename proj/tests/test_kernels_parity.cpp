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

// The OpenMP kernels must agree with the serial reference implementation
// and be reproducible run to run.

#include <cmath>

#include "doctest.h"
#include "privrep/nn.hpp"
#include "privrep/rng.hpp"

using namespace privrep;

namespace {

struct Problem {
  Mlp model;
  std::vector<Vec> xs;
  std::vector<int> ys;
};

Problem make_problem(std::size_t n, int d, int h, int c, std::uint64_t seed) {
  Rng rng(seed);
  Rng init = rng.substream("init");
  Problem p{Mlp::initialized(MlpSpec{{d, h, c}, Activation::Tanh, false, true},
                             init),
            {},
            {}};
  for (std::size_t i = 0; i < n; ++i) {
    Vec x(d);
    for (double& v : x) v = rng.normal();
    p.xs.push_back(x);
    p.ys.push_back(static_cast<int>(rng.uniform_index(c)));
  }
  return p;
}

}  // namespace

TEST_CASE("parallel CE gradients match the serial reference") {
  for (std::size_t n : {std::size_t{3}, std::size_t{64}, std::size_t{511}}) {
    const Problem p = make_problem(n, 12, 16, 4, 100 + n);
    const LossGrad serial = ce_loss_grad(p.model, p.xs, p.ys, Exec::Serial);
    const LossGrad parallel = ce_loss_grad(p.model, p.xs, p.ys, Exec::Parallel);
    CHECK(serial.loss == doctest::Approx(parallel.loss).epsilon(1e-12));
    for (std::size_t i = 0; i < serial.grad.size(); ++i)
      CHECK(serial.grad[i] ==
            doctest::Approx(parallel.grad[i]).epsilon(1e-10));
  }
}

TEST_CASE("parallel batch forward matches the serial reference exactly") {
  const Problem p = make_problem(200, 8, 10, 3, 7);
  std::vector<Vec> serial, parallel;
  batch_forward(p.model, p.xs, serial, Exec::Serial);
  batch_forward(p.model, p.xs, parallel, Exec::Parallel);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i)
    CHECK(serial[i] == parallel[i]);  // per-sample work is identical
}

TEST_CASE("parallel reduction is reproducible across repeated runs") {
  const Problem p = make_problem(333, 10, 12, 3, 9);
  const LossGrad a = ce_loss_grad(p.model, p.xs, p.ys, Exec::Parallel);
  const LossGrad b = ce_loss_grad(p.model, p.xs, p.ys, Exec::Parallel);
  CHECK(a.loss == b.loss);
  CHECK(a.grad == b.grad);
}

TEST_CASE("chained CE kernel parity") {
  Rng rng(11);
  Rng init = rng.substream("init");
  const Mlp enc = Mlp::initialized(
      MlpSpec{{6, 8, 4}, Activation::Tanh, true, false}, init);
  const Mlp head = Mlp::initialized(
      MlpSpec{{4, 8, 2}, Activation::Relu, false, true}, init);
  std::vector<Vec> xs(97, Vec(6));
  std::vector<int> ys(97);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (double& v : xs[i]) v = rng.normal();
    ys[i] = static_cast<int>(rng.uniform_index(2));
  }
  Vec ge_s(enc.num_params(), 0.0), gh_s(head.num_params(), 0.0);
  Vec ge_p(enc.num_params(), 0.0), gh_p(head.num_params(), 0.0);
  const double ls = chain_ce_loss_grad(enc, head, xs, ys, &ge_s, &gh_s,
                                       Exec::Serial);
  const double lp = chain_ce_loss_grad(enc, head, xs, ys, &ge_p, &gh_p,
                                       Exec::Parallel);
  CHECK(ls == doctest::Approx(lp).epsilon(1e-12));
  for (std::size_t i = 0; i < ge_s.size(); ++i)
    CHECK(ge_s[i] == doctest::Approx(ge_p[i]).epsilon(1e-10));
  for (std::size_t i = 0; i < gh_s.size(); ++i)
    CHECK(gh_s[i] == doctest::Approx(gh_p[i]).epsilon(1e-10));
}
