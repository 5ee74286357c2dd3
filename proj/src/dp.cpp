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

#include "privrep/dp.hpp"

#include <cmath>

#include "train_util.hpp"

namespace privrep {

void clip_to_norm(Vec& g, double c) {
  if (c <= 0.0) throw InvalidArgument("clip_to_norm: clip norm must be positive");
  double sq = 0.0;
  for (double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > c) {
    const double scale = c / norm;
    for (double& v : g) v *= scale;
  }
}

Vec clipped_mean(std::span<const Vec> per_sample_grads, double c) {
  if (per_sample_grads.empty()) throw EmptyDataset("clipped_mean: no gradients");
  Vec acc(per_sample_grads.front().size(), 0.0);
  for (const Vec& g : per_sample_grads) {
    if (g.size() != acc.size())
      throw DimensionMismatch("clipped_mean: gradient shape mismatch");
    Vec clipped = g;
    clip_to_norm(clipped, c);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += clipped[i];
  }
  const double inv = 1.0 / static_cast<double>(per_sample_grads.size());
  for (double& v : acc) v *= inv;
  return acc;
}

void dpsgd_step(Mlp& encoder, Mlp& head, std::span<const Vec> xs,
                std::span<const int> ys, const DpConfig& dp, Rng& rng,
                Exec exec) {
  if (dp.clip_norm <= 0.0) throw InvalidArgument("dpsgd_step: clip norm <= 0");
  if (xs.empty()) throw EmptyDataset("dpsgd_step: empty batch");
  const std::size_t ne = encoder.num_params();
  const std::size_t nh = head.num_params();

  // per-sample gradient of the composite, clipped before accumulation
  Vec acc(ne + nh, 0.0);
  Vec* sinks[] = {&acc};
  const double total = batch_reduce(
      xs.size(), exec, std::span<Vec* const>(sinks, 1),
      [&](std::size_t i, std::span<Vec* const> g) {
        Mlp::Cache ec, hc;
        encoder.forward_cached(xs[i], ec);
        head.forward_cached(ec.output(), hc);
        const Vec& probs = hc.output();
        const double loss = ce_from_probs(probs, ys[i]);
        Vec ghead(nh, 0.0), genc(ne, 0.0), dr;
        head.backward(hc, detail::ce_prob_delta(probs, ys[i]), ghead, &dr);
        encoder.backward(ec, std::move(dr), genc);
        Vec joint(ne + nh);
        std::copy(genc.begin(), genc.end(), joint.begin());
        std::copy(ghead.begin(), ghead.end(), joint.begin() + ne);
        clip_to_norm(joint, dp.clip_norm);
        for (std::size_t k = 0; k < joint.size(); ++k) (*g[0])[k] += joint[k];
        return loss;
      });
  check_finite(total, "dpsgd_step");

  const double inv = 1.0 / static_cast<double>(xs.size());
  const double noise_std = dp.noise_sigma * dp.clip_norm * inv;
  for (double& v : acc) {
    v *= inv;
    if (noise_std > 0.0) v += noise_std * rng.normal();
  }
  Vec& pe = encoder.params();
  Vec& ph = head.params();
  for (std::size_t k = 0; k < ne; ++k) pe[k] -= dp.lr * acc[k];
  for (std::size_t k = 0; k < nh; ++k) ph[k] -= dp.lr * acc[ne + k];
}

std::vector<Vec> dp_encoder_noise(std::span<const Vec> representations,
                                  double sigma2, Rng& rng) {
  if (sigma2 < 0.0) throw InvalidArgument("dp_encoder_noise: sigma2 < 0");
  std::vector<Vec> out(representations.begin(), representations.end());
  if (sigma2 == 0.0) return out;
  const double sd = std::sqrt(sigma2);
  for (Vec& r : out)
    for (double& v : r) v += sd * rng.normal();
  return out;
}

DpSgdModel train_dpsgd(std::span<const LabeledSample> train,
                       const GameConfig& schedule, const DpConfig& dp,
                       const MlpSpec& encoder_arch, const MlpSpec& head_arch,
                       Exec exec) {
  if (train.empty()) throw EmptyDataset("train_dpsgd: empty training set");
  Rng root(schedule.seed);
  Rng init = root.substream("init");
  Rng batches = root.substream("batches");
  Rng noise = root.substream("noise");
  DpSgdModel model{Mlp::initialized(encoder_arch, init),
                   Mlp::initialized(head_arch, init)};
  for (int t = 0; t < schedule.rounds; ++t) {
    for (int i = 0; i < schedule.inner_steps; ++i) {
      const auto idx =
          detail::draw_indices(batches, train.size(), dp.batch_size);
      std::vector<Vec> xs;
      std::vector<int> ys;
      xs.reserve(idx.size());
      ys.reserve(idx.size());
      for (std::size_t k : idx) {
        xs.push_back(train[k].features);
        ys.push_back(train[k].label);
      }
      dpsgd_step(model.encoder, model.utility_head, xs, ys, dp, noise, exec);
    }
    if (!model.encoder.finite() || !model.utility_head.finite())
      throw DivergenceError("train_dpsgd: non-finite parameters");
  }
  return model;
}

}  // namespace privrep
