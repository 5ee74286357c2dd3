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

#include "privrep/defense_mia.hpp"

#include <numeric>

#include "privrep/rng.hpp"
#include "train_util.hpp"

namespace privrep {

using detail::ce_chain_batch;
using detail::draw_indices;

MiaArch MiaArch::defaults(int input_dim, int num_classes, int rep_dim,
                          int hidden) {
  MiaArch a;
  a.encoder = MlpSpec{{input_dim, hidden, rep_dim}, Activation::Tanh, true, false};
  a.membership_head =
      MlpSpec{{rep_dim, hidden, 2}, Activation::Relu, false, true};
  a.utility_head =
      MlpSpec{{rep_dim, hidden, num_classes}, Activation::Relu, false, true};
  return a;
}

std::pair<double, double> mia_losses(const MiaGameState& state,
                                     std::span<const LabeledSample> d1,
                                     std::span<const LabeledSample> d0) {
  if (d1.empty() && d0.empty()) throw EmptyDataset("mia_losses: empty batch");
  double l1 = 0.0;
  auto membership_term = [&](std::span<const LabeledSample> group, int u) {
    for (const auto& s : group) {
      const Vec r = state.encoder.forward(s.features);
      const Vec p = state.membership_head.forward(r);
      l1 += ce_from_probs(p, u);
    }
  };
  membership_term(d1, 1);
  membership_term(d0, 0);
  double l2 = 0.0;
  for (const auto& s : d1) {
    const Vec r = state.encoder.forward(s.features);
    const Vec p = state.utility_head.forward(r);
    l2 += ce_from_probs(p, s.label);
  }
  return {l1, l2};
}

namespace {

struct BatchView {
  std::vector<Vec> xs;
  std::vector<int> ys;
};

// Balanced membership batch: half members (u=1), half non-members (u=0).
BatchView membership_batch(const MiaTrainData& data,
                           std::span<const std::size_t> member_pool,
                           std::span<const std::size_t> nonmember_pool,
                           int batch_size, Rng& rng) {
  BatchView b;
  const std::size_t half = std::max<std::size_t>(1, batch_size / 2);
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t i = member_pool[rng.uniform_index(member_pool.size())];
    b.xs.push_back(data.members[i].features);
    b.ys.push_back(1);
  }
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t i =
        nonmember_pool[rng.uniform_index(nonmember_pool.size())];
    b.xs.push_back(data.nonmembers[i].features);
    b.ys.push_back(0);
  }
  return b;
}

BatchView utility_batch(std::span<const LabeledSample> members, int batch_size,
                        Rng& rng) {
  BatchView b;
  for (int k = 0; k < batch_size; ++k) {
    const auto& s = members[rng.uniform_index(members.size())];
    b.xs.push_back(s.features);
    b.ys.push_back(s.label);
  }
  return b;
}

std::vector<std::size_t> pool_or_all(const std::vector<std::size_t>& pool,
                                     std::size_t n) {
  if (!pool.empty()) return pool;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

}  // namespace

MiaGameState train_mia_defense(const MiaTrainData& data,
                               const GameConfig& config, const MiaArch& arch,
                               Exec exec) {
  config.validate();
  if (data.members.empty() || data.nonmembers.empty())
    throw EmptyDataset("train_mia_defense: empty member or non-member set");

  Rng root(config.seed);
  Rng init = root.substream("init");
  Rng batches = root.substream("batches");

  MiaGameState state{Mlp::initialized(arch.encoder, init),
                     Mlp::initialized(arch.membership_head, init),
                     Mlp::initialized(arch.utility_head, init),
                     config};

  const auto member_pool = pool_or_all(data.l1_members, data.members.size());
  const auto nonmember_pool =
      pool_or_all(data.l1_nonmembers, data.nonmembers.size());

  OptimizerState opt_psi = OptimizerState::adam(config.lr1);
  OptimizerState opt_omega = OptimizerState::adam(config.lr2);
  OptimizerState opt_theta = OptimizerState::adam(config.lr3);

  const double lambda = config.lambda;
  Vec g_enc(state.encoder.num_params());
  Vec g_head(state.membership_head.num_params());
  Vec g_util(state.utility_head.num_params());

  for (int t = 0; t < config.rounds; ++t) {
    double round_l1 = 0.0, round_l2 = 0.0;
    for (int i = 0; i < config.inner_steps; ++i) {
      const BatchView mb = membership_batch(data, member_pool, nonmember_pool,
                                            config.batch_size, batches);
      const BatchView ub =
          utility_batch(data.members, config.batch_size, batches);

      // adversary head descends the membership cross entropy
      g_head.assign(g_head.size(), 0.0);
      double l1 = ce_chain_batch(state.encoder, state.membership_head, mb.xs,
                                 mb.ys, nullptr, &g_head, exec);
      check_finite(l1, "mia membership loss");
      opt_psi.step(state.membership_head.params(), g_head);

      // utility head descends the task cross entropy
      g_util.assign(g_util.size(), 0.0);
      double l2 = ce_chain_batch(state.encoder, state.utility_head, ub.xs,
                                 ub.ys, nullptr, &g_util, exec);
      check_finite(l2, "mia utility loss");
      opt_omega.step(state.utility_head.params(), g_util);

      // encoder ascends lambda*L1 - (1-lambda)*L2, run as descent on the
      // negation
      g_enc.assign(g_enc.size(), 0.0);
      if (lambda > 0.0) {
        Vec g1(g_enc.size(), 0.0);
        l1 = ce_chain_batch(state.encoder, state.membership_head, mb.xs, mb.ys,
                            &g1, nullptr, exec);
        for (std::size_t k = 0; k < g_enc.size(); ++k)
          g_enc[k] += -lambda * g1[k];
      }
      if (lambda < 1.0) {
        Vec g2(g_enc.size(), 0.0);
        l2 = ce_chain_batch(state.encoder, state.utility_head, ub.xs, ub.ys,
                            &g2, nullptr, exec);
        for (std::size_t k = 0; k < g_enc.size(); ++k)
          g_enc[k] += (1.0 - lambda) * g2[k];
      }
      opt_theta.step(state.encoder.params(), g_enc);

      round_l1 += l1;
      round_l2 += l2;
    }
    if (!state.encoder.finite() || !state.membership_head.finite() ||
        !state.utility_head.finite())
      throw DivergenceError("train_mia_defense: non-finite parameters at round " +
                            std::to_string(t));
    state.round_losses.emplace_back(round_l1 / config.inner_steps,
                                    round_l2 / config.inner_steps);
    state.rounds_done = t + 1;
  }
  return state;
}

double advreg_mode_loss(const Mlp& confidence_net, const Mlp& membership_head,
                        std::span<const LabeledSample> d1,
                        std::span<const LabeledSample> d0, double lambda) {
  if (!confidence_net.spec().softmax_output)
    throw InvalidArgument("advreg_mode_loss: confidence net must emit probabilities");
  if (membership_head.input_dim() != confidence_net.output_dim())
    throw DimensionMismatch("advreg_mode_loss: head input dimension mismatch");
  double term1 = 0.0;
  auto add_membership = [&](std::span<const LabeledSample> group, int u) {
    for (const auto& s : group) {
      const Vec p = confidence_net.forward(s.features);
      const Vec q = membership_head.forward(p);
      term1 += ce_from_probs(q, u);
    }
  };
  add_membership(d1, 1);
  add_membership(d0, 0);
  double term2 = 0.0;
  for (const auto& s : d1) {
    const Vec p = confidence_net.forward(s.features);
    term2 += ce_from_probs(p, s.label);
  }
  return lambda * term1 - (1.0 - lambda) * term2;
}

AdvregState train_advreg_defense(const MiaTrainData& data,
                                 const GameConfig& config, int num_classes,
                                 int hidden, Exec exec) {
  config.validate();
  const int d = static_cast<int>(data.members.front().features.size());
  Rng root(config.seed);
  Rng init = root.substream("init");
  Rng batches = root.substream("batches");

  AdvregState state{
      Mlp::initialized(
          MlpSpec{{d, hidden, num_classes}, Activation::Tanh, false, true},
          init),
      Mlp::initialized(
          MlpSpec{{num_classes, hidden, 2}, Activation::Relu, false, true},
          init),
      config};

  const auto member_pool = pool_or_all(data.l1_members, data.members.size());
  const auto nonmember_pool =
      pool_or_all(data.l1_nonmembers, data.nonmembers.size());

  OptimizerState opt_psi = OptimizerState::adam(config.lr1);
  OptimizerState opt_theta = OptimizerState::adam(config.lr3);
  const double lambda = config.lambda;

  for (int t = 0; t < config.rounds; ++t) {
    double round_l1 = 0.0, round_l2 = 0.0;
    for (int i = 0; i < config.inner_steps; ++i) {
      const BatchView mb = membership_batch(data, member_pool, nonmember_pool,
                                            config.batch_size, batches);
      const BatchView ub =
          utility_batch(data.members, config.batch_size, batches);

      Vec g_head(state.membership_head.num_params(), 0.0);
      double l1 = ce_chain_batch(state.confidence_net, state.membership_head,
                                 mb.xs, mb.ys, nullptr, &g_head, exec);
      check_finite(l1, "advreg membership loss");
      opt_psi.step(state.membership_head.params(), g_head);

      Vec g_net(state.confidence_net.num_params(), 0.0);
      double l2 = 0.0;
      if (lambda > 0.0) {
        Vec g1(g_net.size(), 0.0);
        l1 = ce_chain_batch(state.confidence_net, state.membership_head, mb.xs,
                            mb.ys, &g1, nullptr, exec);
        for (std::size_t k = 0; k < g_net.size(); ++k) g_net[k] -= lambda * g1[k];
      }
      if (lambda < 1.0) {
        LossGrad task = ce_loss_grad(state.confidence_net, ub.xs, ub.ys, exec);
        l2 = task.loss;
        for (std::size_t k = 0; k < g_net.size(); ++k)
          g_net[k] += (1.0 - lambda) * task.grad[k];
      }
      opt_theta.step(state.confidence_net.params(), g_net);
      round_l1 += l1;
      round_l2 += l2;
    }
    if (!state.confidence_net.finite() || !state.membership_head.finite())
      throw DivergenceError("train_advreg_defense: non-finite parameters");
    state.round_losses.emplace_back(round_l1 / config.inner_steps,
                                    round_l2 / config.inner_steps);
    state.rounds_done = t + 1;
  }
  return state;
}

}  // namespace privrep
