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
#include "privrep/attacks.hpp"
#include "privrep/data.hpp"
#include "privrep/rng.hpp"

using namespace privrep;

TEST_CASE("mse / psnr / ssim hand values") {
  const Vec a(4, 0.0), b(4, 1.0);
  SUBCASE("identical inputs") {
    CHECK(mse(a, a) == doctest::Approx(0.0));
    CHECK(psnr(a, a, 1.0) == doctest::Approx(100.0));
    const Vec img(16, 0.37);
    CHECK(ssim(img, img, 4, 4) == doctest::Approx(1.0));
  }
  SUBCASE("zeros vs ones") {
    CHECK(mse(a, b) == doctest::Approx(1.0));
    CHECK(psnr(a, b, 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("uniform +0.1 shift") {
    Vec c(4, 0.4), d(4, 0.5);
    CHECK(mse(c, d) == doctest::Approx(0.01));
    CHECK(psnr(c, d, 1.0) == doctest::Approx(20.0));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(mse(a, Vec(3, 0.0)), DimensionMismatch);
    CHECK_THROWS_AS(ssim(a, a, 3, 3, 1.0), DimensionMismatch);
  }
}

TEST_CASE("ssim is symmetric and below one for distinct images") {
  Rng rng(3);
  Vec a(49), b(49);
  for (double& v : a) v = rng.uniform();
  for (double& v : b) v = rng.uniform();
  const double sab = ssim(a, b, 7, 7);
  const double sba = ssim(b, a, 7, 7);
  CHECK(sab == doctest::Approx(sba).epsilon(1e-12));
  CHECK(sab < 1.0);
  CHECK(sab >= -1.0);
}

TEST_CASE("roc: perfect, constant and anti-correlated scores") {
  SUBCASE("perfect separation") {
    const Vec scores = {0.9, 0.8, 0.4, 0.2};
    const std::vector<int> labels = {1, 1, 0, 0};
    const AttackReport r = roc_and_tpr(scores, labels);
    CHECK(r.roc.front() == std::pair<double, double>{0.0, 0.0});
    CHECK(r.roc.back() == std::pair<double, double>{1.0, 1.0});
    // TPR at FPR=0 reaches 1 before the first false positive
    double tpr_at_zero = 0.0;
    for (const auto& [f, t] : r.roc)
      if (f == 0.0) tpr_at_zero = std::max(tpr_at_zero, t);
    CHECK(tpr_at_zero == doctest::Approx(1.0));
  }
  SUBCASE("constant scores give the diagonal endpoints") {
    const Vec scores = {0.5, 0.5, 0.5, 0.5};
    const std::vector<int> labels = {1, 0, 1, 0};
    const AttackReport r = roc_and_tpr(scores, labels);
    REQUIRE(r.roc.size() == 2);  // (0,0) then (1,1) in one jump
    CHECK(r.roc.back() == std::pair<double, double>{1.0, 1.0});
  }
  SUBCASE("anti-correlated scores sit below the diagonal") {
    const Vec scores = {0.1, 0.2, 0.8, 0.9};
    const std::vector<int> labels = {1, 1, 0, 0};
    const AttackReport r = roc_and_tpr(scores, labels);
    for (const auto& [f, t] : r.roc)
      if (f > 0.0 && f < 1.0) CHECK(t <= f);
  }
  SUBCASE("single-class labels are rejected") {
    CHECK_THROWS_AS(roc_and_tpr(Vec{1.0, 2.0}, std::vector<int>{1, 1}),
                    InvalidArgument);
  }
}

TEST_CASE("roc is monotone with anchored endpoints for arbitrary scores") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + rng.uniform_index(100);
    Vec scores(n);
    std::vector<int> labels(n);
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.uniform_index(10) * 0.1;  // force ties
      labels[i] = rng.uniform() < 0.4 ? 1 : 0;
      (labels[i] ? has1 : has0) = true;
    }
    if (!has0 || !has1) continue;
    const AttackReport r = roc_and_tpr(scores, labels);
    CHECK(r.roc.front() == std::pair<double, double>{0.0, 0.0});
    CHECK(r.roc.back() == std::pair<double, double>{1.0, 1.0});
    for (std::size_t i = 1; i < r.roc.size(); ++i) {
      CHECK(r.roc[i].first >= r.roc[i - 1].first);
      CHECK(r.roc[i].second >= r.roc[i - 1].second);
    }
  }
}

TEST_CASE("random scores keep the TPR-at-FPR curve near the diagonal") {
  Rng rng(23);
  const std::size_t n = 4000;
  Vec scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = i % 2;
  }
  const AttackReport r = roc_and_tpr(scores, labels);
  for (const auto& [f, t] : r.tpr_at) {
    // binomial band: ~4 sigma around f with 2000 positives
    const double sd = std::sqrt(f * (1.0 - f) / 2000.0);
    CHECK(t <= f + 4.0 * sd + 2e-3);
  }
}

namespace {

Mlp identity_encoder(int d) {
  Mlp enc(MlpSpec{{d, d}, Activation::Tanh, false, false});
  for (int i = 0; i < d; ++i) enc.params()[i * d + i] = 1.0;
  return enc;
}

}  // namespace

TEST_CASE("mia attacker on linearly separable membership beats 95%") {
  // membership determined by a margin along a fixed direction
  Rng rng(31);
  const int d = 6;
  std::vector<LabeledSample> train, test;
  std::vector<int> u_train, u_test;
  auto draw = [&](std::vector<LabeledSample>& dst, std::vector<int>& us,
                  int n) {
    for (int i = 0; i < n; ++i) {
      const int u = i % 2;
      Vec x(d);
      for (double& v : x) v = 0.4 * rng.normal();
      x[0] += u ? 1.0 : -1.0;  // wide margin on the first coordinate
      dst.push_back({x, 0});
      us.push_back(u);
    }
  };
  draw(train, u_train, 400);
  draw(test, u_test, 400);

  const Mlp enc = identity_encoder(d);
  const MlpSpec head{{d, 16, 2}, Activation::Relu, false, true};
  AttackTrainConfig cfg;
  cfg.epochs = 60;
  const Mlp attacker = train_mia_attacker(enc, train, u_train, head, cfg, 5);
  const AttackReport rep =
      evaluate_membership_attack(enc, attacker, test, u_test);

  // logistic-regression oracle on the raw features confirms separability
  Vec w(d, 0.0);
  double b = 0.0;
  for (int epoch = 0; epoch < 200; ++epoch)
    for (std::size_t i = 0; i < train.size(); ++i) {
      double z = b;
      for (int k = 0; k < d; ++k) z += w[k] * train[i].features[k];
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double g = p - u_train[i];
      for (int k = 0; k < d; ++k) w[k] -= 0.1 * g * train[i].features[k];
      b -= 0.1 * g;
    }
  std::size_t oracle_hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    double z = b;
    for (int k = 0; k < d; ++k) z += w[k] * test[i].features[k];
    if ((z > 0 ? 1 : 0) == u_test[i]) ++oracle_hits;
  }
  const double oracle_acc = double(oracle_hits) / test.size();
  CHECK(oracle_acc >= 0.95);
  CHECK(rep.accuracy >= 0.95);
}

TEST_CASE("attacker stays at chance when representations carry no signal") {
  Rng rng(37);
  const int d = 5;
  std::vector<LabeledSample> train, test;
  std::vector<int> u_train, u_test;
  for (int i = 0; i < 600; ++i) {
    Vec x(d);
    for (double& v : x) v = rng.normal();
    (i < 300 ? train : test).push_back({x, 0});
    (i < 300 ? u_train : u_test).push_back(i % 2);  // label shuffle
  }
  const Mlp enc = identity_encoder(d);
  AttackTrainConfig cfg;
  cfg.epochs = 40;
  const Mlp attacker = train_mia_attacker(
      enc, train, u_train, MlpSpec{{d, 8, 2}, Activation::Relu, false, true},
      cfg, 6);
  const AttackReport rep =
      evaluate_membership_attack(enc, attacker, test, u_test);
  CHECK(rep.accuracy > 0.40);
  CHECK(rep.accuracy < 0.60);
}

TEST_CASE("attack on representations never beats the raw-feature concat") {
  // x carries the membership bit explicitly; the representation is lossy
  Rng rng(41);
  const int d = 4;
  std::vector<LabeledSample> train, test;
  std::vector<int> u_train, u_test;
  auto draw = [&](std::vector<LabeledSample>& dst, std::vector<int>& us,
                  int n) {
    for (int i = 0; i < n; ++i) {
      const int u = i % 2;
      Vec x(d);
      for (double& v : x) v = rng.normal();
      x[0] = u ? 2.0 : -2.0;
      dst.push_back({x, 0});
      us.push_back(u);
    }
  };
  draw(train, u_train, 300);
  draw(test, u_test, 300);

  // representation drops the informative coordinate
  Mlp lossy(MlpSpec{{d, d}, Activation::Tanh, false, false});
  for (int i = 1; i < d; ++i) lossy.params()[i * d + i] = 1.0;

  AttackTrainConfig cfg;
  cfg.epochs = 50;
  const Mlp on_rep = train_mia_attacker(
      lossy, train, u_train, MlpSpec{{d, 8, 2}, Activation::Relu, false, true},
      cfg, 7);
  const AttackReport rep_only =
      evaluate_membership_attack(lossy, on_rep, test, u_test);

  // concat(representation, raw features) as inputs
  auto concat_inputs = [&](std::span<const LabeledSample> ss) {
    std::vector<Vec> out;
    for (const auto& s : ss) {
      Vec r = lossy.forward(s.features);
      r.insert(r.end(), s.features.begin(), s.features.end());
      out.push_back(r);
    }
    return out;
  };
  const auto ci = concat_inputs(train);
  const Mlp on_concat = train_classifier_head(
      MlpSpec{{2 * d, 8, 2}, Activation::Relu, false, true}, ci, u_train, cfg,
      7);
  const auto ct = concat_inputs(test);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ct.size(); ++i) {
    const Vec q = on_concat.forward(ct[i]);
    if ((q[1] > q[0] ? 1 : 0) == u_test[i]) ++hits;
  }
  const double concat_acc = double(hits) / ct.size();
  CHECK(rep_only.accuracy <= concat_acc + 1e-9);
}

TEST_CASE("pia attacker: constant encoder stays at chance") {
  SynthSpec spec;
  spec.dim = 4;
  spec.ratio_grid = {0.2, 0.3, 0.4, 0.5};
  spec.n_train_bags = 80;
  spec.n_test_bags = 40;
  spec.n_reference = 1200;
  spec.seed = 51;
  const PiaSynthTask task = synth_pia_bags(spec);
  // zero encoder: every representation is the zero vector
  Mlp enc(MlpSpec{{4, 3}, Activation::Tanh, false, false});
  AttackTrainConfig cfg;
  cfg.epochs = 20;
  const PiaAttackResult res = train_pia_attacker(
      enc, task.train_pool.samples, task.train_bags, task.test_pool.samples,
      task.test_bags, AggregatorMode::Mean,
      MlpSpec{{3, 8, 4}, Activation::Relu, false, true}, cfg, 8);
  CHECK(res.report.accuracy < 0.45);  // chance is 0.25
}

TEST_CASE("dra attacker: clean representations of low-dim data reconstruct well") {
  SynthSpec spec;
  spec.dim = 4;
  spec.n_members = 300;
  spec.n_nonmembers = 60;
  spec.n_utility_test = 10;
  spec.seed = 61;
  const DraSynthTask task = synth_dra_task(spec);
  // representation = identity (m = d), no perturbation
  const Mlp enc = identity_encoder(4);
  const PerturbationParams none = PerturbationParams::zeros(4, 0.0);
  AttackTrainConfig cfg;
  cfg.epochs = 80;
  const DraAttackResult res =
      train_dra_attacker(enc, none, task.train.samples,
                         task.attack_test.samples, 0, 0, cfg, 9);
  // feature variance is the constant-predictor floor; reconstruction from
  // a lossless representation must do far better
  double var = 0.0;
  Vec mean(4, 0.0);
  for (const auto& s : task.attack_test.samples)
    for (int k = 0; k < 4; ++k) mean[k] += s.features[k];
  for (double& v : mean) v /= task.attack_test.samples.size();
  for (const auto& s : task.attack_test.samples)
    for (int k = 0; k < 4; ++k) {
      const double d = s.features[k] - mean[k];
      var += d * d;
    }
  var /= 4.0 * task.attack_test.samples.size();
  CHECK(res.report.mean_mse < 0.2 * var);
}
