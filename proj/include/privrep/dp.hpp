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

#ifndef PRIVREP_DP_HPP_
#define PRIVREP_DP_HPP_

#include <span>
#include <vector>

#include "privrep/core.hpp"
#include "privrep/nn.hpp"
#include "privrep/rng.hpp"

namespace privrep {

// Mechanism knobs only; noise levels are swept directly and compared by
// (utility, attack accuracy) operating points. No privacy accountant.
struct DpConfig {
  double clip_norm = 1.0;    // C > 0
  double noise_sigma = 0.0;  // gradient-noise multiplier (DP-SGD)
  double sigma2 = 0.0;       // representation-noise variance (DP-encoder)
  int batch_size = 64;
  double lr = 1e-3;
};

// Scales g to norm <= c when needed.
void clip_to_norm(Vec& g, double c);

// Mean of per-sample gradients after clipping each to norm <= c.
Vec clipped_mean(std::span<const Vec> per_sample_grads, double c);

// One DP-SGD step on the encoder+head composite: per-sample gradients
// clipped to C, averaged, Gaussian noise of std noise_sigma*C/batch added
// per coordinate, then an SGD update with dp.lr.
void dpsgd_step(Mlp& encoder, Mlp& head, std::span<const Vec> xs,
                std::span<const int> ys, const DpConfig& dp, Rng& rng,
                Exec exec = Exec::Parallel);

// i.i.d. N(0, sigma2) added per coordinate.
std::vector<Vec> dp_encoder_noise(std::span<const Vec> representations,
                                  double sigma2, Rng& rng);

struct DpSgdModel {
  Mlp encoder;
  Mlp utility_head;
};

// Trains encoder+utility with DP-SGD for rounds*inner_steps batches.
DpSgdModel train_dpsgd(std::span<const LabeledSample> train,
                       const GameConfig& schedule, const DpConfig& dp,
                       const MlpSpec& encoder_arch, const MlpSpec& head_arch,
                       Exec exec = Exec::Parallel);

}  // namespace privrep

#endif  // PRIVREP_DP_HPP_
