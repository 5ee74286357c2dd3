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
#include "privrep/mi.hpp"
#include "privrep/rng.hpp"
#include "support/oracles.hpp"

using namespace privrep;

TEST_CASE("club inner objective: hand-computed log-likelihoods") {
  // one pair with q(u=1|r) = 0.8 and u = 1
  CHECK(club_inner_objective(Vec{std::log(0.8)}) ==
        doctest::Approx(-0.2231).epsilon(1e-3));
  // uninformative predictor q = 0.5 everywhere
  CHECK(club_inner_objective(Vec(4, std::log(0.5))) ==
        doctest::Approx(-std::log(2.0)));
  // perfect predictor
  CHECK(club_inner_objective(Vec(3, 0.0)) == doctest::Approx(0.0));
}

TEST_CASE("club mi value: two-pair hand computation") {
  // q assigns 0.9 to each correct label, labels differ
  const double l9 = std::log(0.9), l1 = std::log(0.1);
  // logq[i][j] = log q(u_j | r_i)
  const Vec matrix = {l9, l1, l1, l9};
  const MiEstimate est = club_mi_value(matrix, 2);
  CHECK(est.value == doctest::Approx(1.0986).epsilon(1e-4));
  CHECK(est.estimator == "club");
}

TEST_CASE("club mi value: zero when the head ignores the representation") {
  // constant output -> every column identical
  const double a = std::log(0.7), b = std::log(0.3);
  const Vec matrix = {a, b, a, b};
  CHECK(club_mi_value(matrix, 2).value == doctest::Approx(0.0));
}

TEST_CASE("club mi value: zero when the attribute is constant") {
  // all u_j equal: joint and marginal terms coincide for a label-consistent head
  const Vec matrix = {std::log(0.8), std::log(0.8), std::log(0.6), std::log(0.6)};
  CHECK(club_mi_value(matrix, 2).value == doctest::Approx(0.0));
}

TEST_CASE("ce utility objective values") {
  Rng rng(3);
  Rng init = rng.substream("init");
  // head that is uniform over 100 classes: zero weights, zero bias
  Mlp head(MlpSpec{{4, 100}, Activation::Relu, false, true});
  std::vector<Vec> reps = {Vec{1, 2, 3, 4}, Vec{0, 0, 1, 0}};
  std::vector<int> ys = {17, 42};
  CHECK(ce_utility_objective(head, reps, ys) ==
        doctest::Approx(-std::log(100.0)).epsilon(1e-9));
  (void)init;
}

TEST_CASE("ce utility objective: single sample with p = 0.25") {
  const double want = std::log(0.25);
  // build via the generic form
  CHECK(club_inner_objective(Vec{want}) == doctest::Approx(-1.3863).epsilon(1e-3));
}

TEST_CASE("jsd objective: frozen softplus evaluations") {
  CHECK(jsd_mi_objective(Vec{0.0}, Vec{0.0}) ==
        doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-9));
  CHECK(jsd_mi_objective(Vec{5.0}, Vec{-5.0}) ==
        doctest::Approx(-0.01343).epsilon(1e-3));
  CHECK(jsd_mi_objective(Vec{2.0}, Vec{-1.0}) ==
        doctest::Approx(-0.4402).epsilon(1e-3));
}

TEST_CASE("jsd objective is never positive") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(8);
    Vec pos(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = rng.uniform(-50.0, 50.0);
      neg[i] = rng.uniform(-50.0, 50.0);
    }
    CHECK(jsd_mi_objective(pos, neg) <= 0.0);
  }
}

TEST_CASE("sample_perturbation edge cases") {
  Rng rng(21);
  SUBCASE("zero scale") {
    PerturbationParams p = PerturbationParams::zeros(3, 0.0);
    const Vec d = sample_perturbation(p, rng);
    for (double v : d) CHECK(v == 0.0);
  }
  SUBCASE("degenerate gaussian at the origin") {
    PerturbationParams p = PerturbationParams::zeros(3, 1.0);
    p.log_sigma.assign(3, -40.0);
    const Vec d = sample_perturbation(p, rng);
    for (double v : d) CHECK(std::abs(v) < 1e-12);
  }
  SUBCASE("tanh saturation pins the draw at the scale") {
    PerturbationParams p = PerturbationParams::zeros(1, 0.5);
    p.mu[0] = 10.0;
    p.log_sigma[0] = -40.0;
    const Vec d = sample_perturbation(p, rng);
    CHECK(d[0] == doctest::Approx(0.5 * std::tanh(10.0)).epsilon(1e-12));
    CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-7));
  }
}

TEST_CASE("perturbation draws always satisfy the scale bound") {
  for (PerturbFamily fam : {PerturbFamily::GaussianTanh, PerturbFamily::Uniform}) {
    Rng rng(fam == PerturbFamily::Uniform ? 77 : 78);
    PerturbationParams p = PerturbationParams::zeros(4, 0.8, fam);
    p.mu = {0.5, -2.0, 0.0, 3.0};
    p.log_sigma = {0.0, 1.0, -1.0, 0.5};
    for (int i = 0; i < 100000 / 4; ++i) {
      const Vec d = sample_perturbation(p, rng);
      for (double v : d) CHECK(std::abs(v) <= 0.8);
    }
  }
}

TEST_CASE("entropy scaling law: doubling the scale adds d ln 2") {
  PerturbationParams p = PerturbationParams::zeros(3, 1.0);
  p.mu = {0.1, -0.3, 0.2};
  p.log_sigma = {0.0, -0.5, 0.3};
  Rng r1(5), r2(5);  // common random numbers
  const double h1 = perturbation_entropy(p, 64, r1);
  p.epsilon = 2.0;
  const double h2 = perturbation_entropy(p, 64, r2);
  CHECK(h2 - h1 == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("entropy matches a plain Monte-Carlo oracle on the transformed density") {
  // d=1, mu=0, sigma=1, eps=1
  PerturbationParams p = PerturbationParams::zeros(1, 1.0);
  const int n_oracle = 1000000;
  Rng orng(123);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_oracle; ++i) {
    const double u = orng.normal();
    // -ln p_delta(delta) = -ln p_u(u) + ln(eps (1 - tanh^2 u))
    const double neg_log_pu = 0.5 * std::log(2.0 * 3.14159265358979323846) +
                              0.5 * u * u;
    const double t = std::tanh(u);
    const double v = neg_log_pu + std::log(1.0 - t * t);
    sum += v;
    sumsq += v * v;
  }
  const double oracle = sum / n_oracle;
  const double var = sumsq / n_oracle - oracle * oracle;
  const double se = std::sqrt(var / n_oracle);

  Rng irng(321);
  const double impl = perturbation_entropy(p, n_oracle, irng);
  // both are 1e6-sample estimates of the same quantity
  CHECK(std::abs(impl - oracle) <= 3.0 * 2.0 * se);
}

TEST_CASE("entropy increases when any sigma doubles (pre-saturation regime)") {
  // the gain ln 2 in base entropy dominates the Jacobian loss while the
  // doubled sigma stays below tanh saturation
  PerturbationParams p = PerturbationParams::zeros(3, 1.0);
  p.mu = {0.1, -0.05, 0.15};
  p.log_sigma = {std::log(0.10), std::log(0.18), std::log(0.25)};
  for (int i = 0; i < 3; ++i) {
    Rng r1(99), r2(99);
    const double before = perturbation_entropy(p, 20000, r1);
    PerturbationParams q = p;
    q.log_sigma[i] += std::log(2.0);
    const double after = perturbation_entropy(q, 20000, r2);
    CHECK(after > before);
  }
}

TEST_CASE("entropy at zero scale reports the sentinel") {
  PerturbationParams p = PerturbationParams::zeros(2, 0.0);
  Rng rng(1);
  CHECK(perturbation_entropy(p, 8, rng) == kEntropySentinel);
}

TEST_CASE("pathwise entropy gradient matches finite differences under CRN") {
  for (PerturbFamily fam : {PerturbFamily::GaussianTanh, PerturbFamily::Uniform}) {
    PerturbationParams p = PerturbationParams::zeros(3, 0.7, fam);
    p.mu = {0.3, -0.6, 0.1};
    p.log_sigma = {-0.3, 0.2, 0.0};
    Rng rng(fam == PerturbFamily::Uniform ? 15 : 16);
    std::vector<Vec> draws(32);
    for (auto& z : draws) z = sample_perturbation_base(p, rng);

    const EntropyEval ev = perturbation_entropy_with_grad(p, draws);
    Vec analytic = ev.dmu;
    analytic.insert(analytic.end(), ev.dlog_sigma.begin(), ev.dlog_sigma.end());

    Vec packed = p.mu;
    packed.insert(packed.end(), p.log_sigma.begin(), p.log_sigma.end());
    const Vec fd = oracles::finite_difference(
        [&] {
          PerturbationParams q = p;
          q.mu = Vec(packed.begin(), packed.begin() + 3);
          q.log_sigma = Vec(packed.begin() + 3, packed.end());
          return perturbation_entropy_with_grad(q, draws).value;
        },
        packed);
    CHECK(oracles::grads_match(analytic, fd, 1e-3, 1e-6));
  }
}
