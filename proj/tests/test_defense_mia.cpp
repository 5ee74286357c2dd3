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
#include "privrep/data.hpp"
#include "privrep/defense_mia.hpp"
#include "privrep/rng.hpp"
#include "support/oracles.hpp"

using namespace privrep;

namespace {

MiaGameState fixed_state(int d, int m, int C) {
  Rng rng(17);
  Rng init = rng.substream("init");
  MiaArch arch = MiaArch::defaults(d, C, m, 8);
  return MiaGameState{Mlp::initialized(arch.encoder, init),
                      Mlp::initialized(arch.membership_head, init),
                      Mlp::initialized(arch.utility_head, init),
                      GameConfig{}};
}

std::vector<LabeledSample> tiny_batch(int n, int d, int C, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledSample> out;
  for (int i = 0; i < n; ++i) {
    Vec x(d);
    for (double& v : x) v = rng.normal();
    out.push_back({x, static_cast<int>(rng.uniform_index(C))});
  }
  return out;
}

}  // namespace

TEST_CASE("mia_losses: uniform membership head gives N ln 2") {
  MiaGameState st = fixed_state(3, 4, 2);
  // zero the membership head so it outputs the uniform distribution
  st.membership_head.params().assign(st.membership_head.num_params(), 0.0);
  const auto d1 = tiny_batch(3, 3, 2, 1);
  const auto d0 = tiny_batch(2, 3, 2, 2);
  const auto [l1, l2] = mia_losses(st, d1, d0);
  CHECK(l1 == doctest::Approx(5.0 * std::log(2.0)).epsilon(1e-9));
  (void)l2;
}

TEST_CASE("mia_losses: perfect utility head gives zero task loss") {
  MiaGameState st = fixed_state(2, 3, 2);
  // encoder: identity-ish is unnecessary; rig the utility head to always
  // put (almost) all mass on class 0 and use class-0 labels
  st.utility_head.params().assign(st.utility_head.num_params(), 0.0);
  auto& p = st.utility_head.params();
  // bias of the output layer: +60 for class 0
  p[st.utility_head.bias_offset(1)] = 60.0;
  auto d1 = tiny_batch(4, 2, 2, 3);
  for (auto& s : d1) s.label = 0;
  const auto [l1, l2] = mia_losses(st, d1, {});
  CHECK(l2 == doctest::Approx(0.0).epsilon(1e-9));
  (void)l1;
}

TEST_CASE("mia_losses: single member contribution is -ln q(u)") {
  MiaGameState st = fixed_state(2, 3, 2);
  st.membership_head.params().assign(st.membership_head.num_params(), 0.0);
  auto& p = st.membership_head.params();
  // output-layer bias ln(0.3), ln(0.7) => softmax gives exactly (0.3, 0.7)
  p[st.membership_head.bias_offset(1) + 0] = std::log(0.3);
  p[st.membership_head.bias_offset(1) + 1] = std::log(0.7);
  const auto d1 = tiny_batch(1, 2, 2, 4);
  const auto [l1, l2] = mia_losses(st, d1, {});
  CHECK(l1 == doctest::Approx(-std::log(0.7)).epsilon(1e-9));
  CHECK(l1 == doctest::Approx(0.3567).epsilon(1e-3));
  (void)l2;
}

TEST_CASE("advreg loss reduces to the pure terms at degenerate lambda") {
  Rng rng(23);
  Rng init = rng.substream("init");
  Mlp conf = Mlp::initialized(
      MlpSpec{{3, 6, 2}, Activation::Tanh, false, true}, init);
  Mlp head = Mlp::initialized(
      MlpSpec{{2, 6, 2}, Activation::Relu, false, true}, init);
  const auto d1 = tiny_batch(4, 3, 2, 5);
  const auto d0 = tiny_batch(4, 3, 2, 6);

  double task_ce = 0.0;
  for (const auto& s : d1)
    task_ce += ce_from_probs(conf.forward(s.features), s.label);
  double adv_ce = 0.0;
  for (const auto& s : d1)
    adv_ce += ce_from_probs(head.forward(conf.forward(s.features)), 1);
  for (const auto& s : d0)
    adv_ce += ce_from_probs(head.forward(conf.forward(s.features)), 0);

  CHECK(advreg_mode_loss(conf, head, d1, d0, 0.0) ==
        doctest::Approx(-task_ce).epsilon(1e-12));
  CHECK(advreg_mode_loss(conf, head, d1, d0, 1.0) ==
        doctest::Approx(adv_ce).epsilon(1e-12));
}

TEST_CASE("advreg equals the game surrogate with an identity utility head") {
  Rng rng(29);
  Rng init = rng.substream("init");
  const int C = 3;
  Mlp conf = Mlp::initialized(
      MlpSpec{{4, 8, C}, Activation::Tanh, false, true}, init);
  Mlp head = Mlp::initialized(
      MlpSpec{{C, 8, 2}, Activation::Relu, false, true}, init);

  // identity utility head: single linear layer, identity weights
  Mlp identity(MlpSpec{{C, C}, Activation::Tanh, false, false});
  for (int i = 0; i < C; ++i) identity.params()[i * C + i] = 1.0;

  MiaGameState st{conf, head, identity, GameConfig{}};
  const auto d1 = tiny_batch(5, 4, C, 7);
  const auto d0 = tiny_batch(5, 4, C, 8);
  const auto [l1, l2] = mia_losses(st, d1, d0);

  for (double lambda : {0.0, 0.3, 0.75, 1.0}) {
    const double surrogate = lambda * l1 - (1.0 - lambda) * l2;
    const double advreg = advreg_mode_loss(conf, head, d1, d0, lambda);
    CHECK(std::abs(surrogate - advreg) < 1e-10);
  }
}

TEST_CASE("training losses match finite differences (membership game)") {
  Rng rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    MiaGameState st = fixed_state(3, 4, 2);
    Rng init = rng.substream("re-init", trial);
    st.encoder = Mlp::initialized(st.encoder.spec(), init);
    st.membership_head = Mlp::initialized(st.membership_head.spec(), init);
    st.utility_head = Mlp::initialized(st.utility_head.spec(), init);
    const auto d1 = tiny_batch(4, 3, 2, 100 + trial);
    std::vector<Vec> xs;
    std::vector<int> ys, us;
    for (const auto& s : d1) {
      xs.push_back(s.features);
      ys.push_back(s.label);
      us.push_back(1);
    }

    // adversary objective w.r.t. its own parameters
    Vec ghead(st.membership_head.num_params(), 0.0);
    chain_ce_loss_grad(st.encoder, st.membership_head, xs, us, nullptr, &ghead,
                       Exec::Serial);
    const Vec fd_head = oracles::finite_difference(
        [&] {
          return chain_ce_loss_grad(st.encoder, st.membership_head, xs, us,
                                    nullptr, nullptr, Exec::Serial);
        },
        st.membership_head.params());
    CHECK(oracles::grads_match(ghead, fd_head, 1e-4, 1e-6));

    // encoder objective lambda*L1 - (1-lambda)*L2 (as descended)
    const double lambda = 0.6;
    Vec g1(st.encoder.num_params(), 0.0), g2(st.encoder.num_params(), 0.0);
    chain_ce_loss_grad(st.encoder, st.membership_head, xs, us, &g1, nullptr,
                       Exec::Serial);
    chain_ce_loss_grad(st.encoder, st.utility_head, xs, ys, &g2, nullptr,
                       Exec::Serial);
    Vec genc(st.encoder.num_params());
    for (std::size_t k = 0; k < genc.size(); ++k)
      genc[k] = -lambda * g1[k] + (1 - lambda) * g2[k];
    const Vec fd_enc = oracles::finite_difference(
        [&] {
          const double l1 = chain_ce_loss_grad(st.encoder, st.membership_head,
                                               xs, us, nullptr, nullptr,
                                               Exec::Serial);
          const double l2 = chain_ce_loss_grad(st.encoder, st.utility_head, xs,
                                               ys, nullptr, nullptr,
                                               Exec::Serial);
          return -(lambda * l1 - (1 - lambda) * l2);
        },
        st.encoder.params());
    CHECK(oracles::grads_match(genc, fd_enc, 1e-4, 1e-6));
  }
}

TEST_CASE("with lambda=0 the encoder trajectory ignores the adversary") {
  SynthSpec spec;
  spec.n_members = 60;
  spec.n_nonmembers = 60;
  spec.n_utility_test = 10;
  spec.seed = 9;
  const MiaSynthTask task = synth_mia_task(spec);
  MiaTrainData data{task.members, task.nonmembers, {}, {}};

  GameConfig g;
  g.lambda = 0.0;
  g.rounds = 6;
  g.inner_steps = 2;
  g.batch_size = 16;
  g.seed = 77;
  const MiaArch arch = MiaArch::defaults(spec.dim, 2, 6, 8);

  GameConfig g_fast = g;
  g_fast.lr1 = 0.05;  // very different adversary learning rate
  const MiaGameState a = train_mia_defense(data, g, arch, Exec::Serial);
  const MiaGameState b = train_mia_defense(data, g_fast, arch, Exec::Serial);
  for (std::size_t i = 0; i < a.encoder.num_params(); ++i)
    CHECK(a.encoder.params()[i] == doctest::Approx(b.encoder.params()[i]).epsilon(1e-12));

  // sanity: at lambda > 0 the adversary rate must matter
  GameConfig g2 = g;
  g2.lambda = 0.5;
  GameConfig g2_fast = g_fast;
  g2_fast.lambda = 0.5;
  const MiaGameState c = train_mia_defense(data, g2, arch, Exec::Serial);
  const MiaGameState d2 = train_mia_defense(data, g2_fast, arch, Exec::Serial);
  double diff = 0.0;
  for (std::size_t i = 0; i < c.encoder.num_params(); ++i)
    diff += std::abs(c.encoder.params()[i] - d2.encoder.params()[i]);
  CHECK(diff > 1e-6);
}

TEST_CASE("training is deterministic per seed") {
  SynthSpec spec;
  spec.n_members = 40;
  spec.n_nonmembers = 40;
  spec.n_utility_test = 10;
  spec.seed = 12;
  const MiaSynthTask task = synth_mia_task(spec);
  MiaTrainData data{task.members, task.nonmembers, {}, {}};
  GameConfig g;
  g.lambda = 0.5;
  g.rounds = 4;
  g.inner_steps = 2;
  g.batch_size = 8;
  g.seed = 5;
  const MiaArch arch = MiaArch::defaults(spec.dim, 2, 4, 6);
  const MiaGameState a = train_mia_defense(data, g, arch);
  const MiaGameState b = train_mia_defense(data, g, arch);
  for (std::size_t i = 0; i < a.encoder.num_params(); ++i)
    CHECK(std::abs(a.encoder.params()[i] - b.encoder.params()[i]) <= 1e-9);
  for (std::size_t i = 0; i < a.round_losses.size(); ++i)
    CHECK(a.round_losses[i].first ==
          doctest::Approx(b.round_losses[i].first).epsilon(1e-12));
}

TEST_CASE("parameters stay finite after training") {
  SynthSpec spec;
  spec.n_members = 30;
  spec.n_nonmembers = 30;
  spec.n_utility_test = 5;
  spec.seed = 2;
  const MiaSynthTask task = synth_mia_task(spec);
  MiaTrainData data{task.members, task.nonmembers, {}, {}};
  GameConfig g;
  g.lambda = 1.0;  // pure adversarial ascent is the stress case
  g.alpha = 0.0;
  g.rounds = 8;
  g.inner_steps = 2;
  g.batch_size = 8;
  g.seed = 3;
  const MiaGameState st =
      train_mia_defense(data, g, MiaArch::defaults(spec.dim, 2, 4, 6));
  CHECK(st.encoder.finite());
  CHECK(st.membership_head.finite());
  CHECK(st.utility_head.finite());
}
