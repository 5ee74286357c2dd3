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

#include "privrep/defense_pia.hpp"

#include <algorithm>
#include <cmath>

#include "privrep/rng.hpp"
#include "train_util.hpp"

namespace privrep {

Representation aggregate(std::span<const Representation> reps,
                         AggregatorMode mode) {
  if (reps.empty()) throw EmptyDataset("aggregate: empty input");
  const std::size_t m = reps.front().size();
  for (const auto& r : reps)
    if (r.size() != m) throw DimensionMismatch("aggregate: mixed dimensions");
  Representation out(reps.front());
  if (mode == AggregatorMode::Mean) {
    for (std::size_t i = 1; i < reps.size(); ++i)
      for (std::size_t j = 0; j < m; ++j) out[j] += reps[i][j];
    const double inv = 1.0 / static_cast<double>(reps.size());
    for (double& v : out) v *= inv;
  } else {
    for (std::size_t i = 1; i < reps.size(); ++i)
      for (std::size_t j = 0; j < m; ++j) out[j] = std::max(out[j], reps[i][j]);
  }
  return out;
}

namespace {

// Banker's rounding for the realized attribute count.
long round_half_even(double x) {
  const double fl = std::floor(x);
  const double frac = x - fl;
  if (frac > 0.5) return static_cast<long>(fl) + 1;
  if (frac < 0.5) return static_cast<long>(fl);
  const long lo = static_cast<long>(fl);
  return lo % 2 == 0 ? lo : lo + 1;
}

// k distinct picks from pool, deterministic partial Fisher-Yates.
std::vector<std::size_t> pick_distinct(std::vector<std::size_t>& pool, long k,
                                       Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(k);
  for (long i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace

std::vector<DatasetBag> sample_bags(std::span<const LabeledSample> reference,
                                    std::span<const int> attributes,
                                    std::span<const double> ratio_grid,
                                    std::pair<int, int> size_range, int count,
                                    std::uint64_t seed) {
  if (reference.empty()) throw EmptyDataset("sample_bags: empty reference");
  if (attributes.size() != reference.size())
    throw DimensionMismatch("sample_bags: attribute column missing or short");
  if (ratio_grid.empty()) throw InvalidArgument("sample_bags: empty ratio grid");
  for (double r : ratio_grid)
    if (r < 0.0 || r > 1.0)
      throw InvalidArgument("sample_bags: ratios must lie in [0,1]");
  if (size_range.first < 2 || size_range.second < size_range.first)
    throw InvalidArgument("sample_bags: invalid size range");

  std::vector<std::size_t> ones, zeros;
  for (std::size_t i = 0; i < attributes.size(); ++i)
    (attributes[i] ? ones : zeros).push_back(i);

  Rng rng(seed);
  std::vector<DatasetBag> bags;
  bags.reserve(count);
  for (int b = 0; b < count; ++b) {
    const int size = size_range.first +
                     static_cast<int>(rng.uniform_index(
                         size_range.second - size_range.first + 1));
    const std::size_t ridx = rng.uniform_index(ratio_grid.size());
    const double ratio = ratio_grid[ridx];
    const long n_ones = round_half_even(ratio * size);
    const long n_zeros = size - n_ones;
    if (n_ones > static_cast<long>(ones.size()) ||
        n_zeros > static_cast<long>(zeros.size()))
      throw InvalidArgument("sample_bags: insufficient samples of an attribute value");
    DatasetBag bag;
    bag.property_value = static_cast<int>(ridx);
    auto picked_ones = pick_distinct(ones, n_ones, rng);
    auto picked_zeros = pick_distinct(zeros, n_zeros, rng);
    bag.sample_indices.insert(bag.sample_indices.end(), picked_ones.begin(),
                              picked_ones.end());
    bag.sample_indices.insert(bag.sample_indices.end(), picked_zeros.begin(),
                              picked_zeros.end());
    bags.push_back(std::move(bag));
  }
  return bags;
}

PiaArch PiaArch::defaults(int input_dim, int num_classes, int num_properties,
                          int rep_dim, int hidden) {
  PiaArch a;
  a.encoder = MlpSpec{{input_dim, hidden, rep_dim}, Activation::Tanh, true, false};
  a.property_head =
      MlpSpec{{rep_dim, hidden, num_properties}, Activation::Relu, false, true};
  a.utility_head =
      MlpSpec{{rep_dim, hidden, num_classes}, Activation::Relu, false, true};
  return a;
}

namespace {

struct BagForward {
  std::vector<Mlp::Cache> caches;  // one per sample
  std::vector<Representation> reps;
  Representation agg;
  std::vector<std::size_t> argmax;  // per dimension, for max aggregation
};

void forward_bag(const Mlp& encoder, std::span<const LabeledSample> store,
                 const DatasetBag& bag, AggregatorMode mode, BagForward& out) {
  const std::size_t n = bag.sample_indices.size();
  out.caches.resize(n);
  out.reps.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    encoder.forward_cached(store[bag.sample_indices[i]].features,
                           out.caches[i]);
    out.reps[i] = out.caches[i].output();
  }
  const std::size_t m = out.reps.front().size();
  out.agg = out.reps.front();
  out.argmax.assign(m, 0);
  if (mode == AggregatorMode::Mean) {
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) out.agg[j] += out.reps[i][j];
    for (double& v : out.agg) v /= static_cast<double>(n);
  } else {
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (out.reps[i][j] > out.agg[j]) {
          out.agg[j] = out.reps[i][j];
          out.argmax[j] = i;
        }
  }
}

// Distributes d(loss)/d(agg) back to the encoder parameters.
void backward_bag(const Mlp& encoder, const BagForward& fwd,
                  AggregatorMode mode, const Vec& dagg, Vec& genc) {
  const std::size_t n = fwd.reps.size();
  const std::size_t m = fwd.agg.size();
  if (mode == AggregatorMode::Mean) {
    Vec dr(m);
    for (std::size_t j = 0; j < m; ++j) dr[j] = dagg[j] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      encoder.backward(fwd.caches[i], dr, genc);
  } else {
    // subgradient: route each dimension to its argmax sample
    std::vector<Vec> per_sample(n, Vec(m, 0.0));
    for (std::size_t j = 0; j < m; ++j) per_sample[fwd.argmax[j]][j] = dagg[j];
    for (std::size_t i = 0; i < n; ++i)
      encoder.backward(fwd.caches[i], std::move(per_sample[i]), genc);
  }
}

}  // namespace

std::pair<double, double> pia_losses(const PiaGameState& state,
                                     std::span<const LabeledSample> store,
                                     std::span<const DatasetBag> bags) {
  if (bags.empty()) throw EmptyDataset("pia_losses: empty bag batch");
  double l1 = 0.0, l2 = 0.0;
  for (const auto& bag : bags) {
    BagForward fwd;
    forward_bag(state.encoder, store, bag, state.aggregator, fwd);
    const Vec q = state.property_head.forward(fwd.agg);
    l1 += ce_from_probs(q, bag.property_value);
    for (std::size_t i = 0; i < bag.sample_indices.size(); ++i) {
      const Vec p = state.utility_head.forward(fwd.reps[i]);
      l2 += ce_from_probs(p, store[bag.sample_indices[i]].label);
    }
  }
  return {l1, l2};
}

double property_chain_loss_grad(const Mlp& encoder, const Mlp& property_head,
                                std::span<const LabeledSample> store,
                                std::span<const DatasetBag> bags,
                                AggregatorMode mode, Vec* genc, Vec* ghead,
                                Exec exec) {
  if (bags.empty()) throw EmptyDataset("property_chain_loss_grad: empty batch");
  Vec dummy;
  Vec* sinks[2] = {genc ? genc : &dummy, ghead ? ghead : &dummy};
  const double total = batch_reduce(
      bags.size(), exec, std::span<Vec* const>(sinks, 2),
      [&](std::size_t k, std::span<Vec* const> g) {
        const DatasetBag& bag = bags[k];
        BagForward fwd;
        forward_bag(encoder, store, bag, mode, fwd);
        Mlp::Cache hc;
        property_head.forward_cached(fwd.agg, hc);
        const Vec& q = hc.output();
        const double loss = ce_from_probs(q, bag.property_value);
        if (genc || ghead) {
          Vec hlocal;
          Vec* hsink = ghead ? g[1] : &hlocal;
          if (!ghead) hlocal.assign(property_head.num_params(), 0.0);
          Vec dagg;
          property_head.backward(hc,
                                 detail::ce_prob_delta(q, bag.property_value),
                                 *hsink, genc ? &dagg : nullptr);
          if (genc) backward_bag(encoder, fwd, mode, dagg, *g[0]);
        }
        return loss;
      });
  const double inv = 1.0 / static_cast<double>(bags.size());
  if (genc)
    for (double& v : *genc) v *= inv;
  if (ghead)
    for (double& v : *ghead) v *= inv;
  check_finite(total, "property_chain_loss_grad");
  return total * inv;
}

PiaGameState train_pia_defense(std::span<const LabeledSample> store,
                               std::span<const DatasetBag> bags,
                               const GameConfig& config,
                               AggregatorMode aggregator, const PiaArch& arch,
                               Exec exec) {
  config.validate();
  if (bags.empty()) throw EmptyDataset("train_pia_defense: no bags");
  int max_prop = 0;
  for (const auto& b : bags) max_prop = std::max(max_prop, b.property_value);
  if (max_prop < 1)
    throw InvalidArgument("train_pia_defense: need >= 2 distinct property classes");

  Rng root(config.seed);
  Rng init = root.substream("init");
  Rng batches = root.substream("batches");

  PiaGameState state{Mlp::initialized(arch.encoder, init),
                     Mlp::initialized(arch.property_head, init),
                     Mlp::initialized(arch.utility_head, init),
                     aggregator,
                     config};

  OptimizerState opt_psi = OptimizerState::adam(config.lr1);
  OptimizerState opt_omega = OptimizerState::adam(config.lr2);
  OptimizerState opt_theta = OptimizerState::adam(config.lr3);
  const double lambda = config.lambda;

  // batch_size counts bags here; the utility term covers the batch's samples
  const std::size_t bag_batch =
      std::max<std::size_t>(2, static_cast<std::size_t>(config.batch_size));

  for (int t = 0; t < config.rounds; ++t) {
    double round_l1 = 0.0, round_l2 = 0.0;
    for (int i = 0; i < config.inner_steps; ++i) {
      const auto idx = detail::draw_indices(batches, bags.size(), bag_batch);
      std::vector<DatasetBag> batch_bags;
      std::vector<Vec> xs;
      std::vector<int> ys;
      for (std::size_t k : idx) {
        batch_bags.push_back(bags[k]);
        for (std::size_t s : bags[k].sample_indices) {
          xs.push_back(store[s].features);
          ys.push_back(store[s].label);
        }
      }

      Vec g_head(state.property_head.num_params(), 0.0);
      double l1 = property_chain_loss_grad(state.encoder, state.property_head,
                                           store, batch_bags, aggregator,
                                           nullptr, &g_head, exec);
      opt_psi.step(state.property_head.params(), g_head);

      Vec g_util(state.utility_head.num_params(), 0.0);
      double l2 = chain_ce_loss_grad(state.encoder, state.utility_head, xs, ys,
                                     nullptr, &g_util, exec);
      opt_omega.step(state.utility_head.params(), g_util);

      Vec g_enc(state.encoder.num_params(), 0.0);
      if (lambda > 0.0) {
        Vec g1(g_enc.size(), 0.0);
        l1 = property_chain_loss_grad(state.encoder, state.property_head,
                                      store, batch_bags, aggregator, &g1,
                                      nullptr, exec);
        for (std::size_t k = 0; k < g_enc.size(); ++k) g_enc[k] -= lambda * g1[k];
      }
      if (lambda < 1.0) {
        Vec g2(g_enc.size(), 0.0);
        l2 = chain_ce_loss_grad(state.encoder, state.utility_head, xs, ys,
                                &g2, nullptr, exec);
        for (std::size_t k = 0; k < g_enc.size(); ++k)
          g_enc[k] += (1.0 - lambda) * g2[k];
      }
      opt_theta.step(state.encoder.params(), g_enc);

      round_l1 += l1;
      round_l2 += l2;
    }
    if (!state.encoder.finite() || !state.property_head.finite() ||
        !state.utility_head.finite())
      throw DivergenceError("train_pia_defense: non-finite parameters at round " +
                            std::to_string(t));
    state.round_losses.emplace_back(round_l1 / config.inner_steps,
                                    round_l2 / config.inner_steps);
    state.rounds_done = t + 1;
  }
  return state;
}

}  // namespace privrep
