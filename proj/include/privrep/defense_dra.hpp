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

#ifndef PRIVREP_DEFENSE_DRA_HPP_
#define PRIVREP_DEFENSE_DRA_HPP_

#include <array>
#include <span>
#include <vector>

#include "privrep/core.hpp"
#include "privrep/mi.hpp"
#include "privrep/nn.hpp"

namespace privrep {

// Running bound on the perturbed representation space, feeding the
// tradeoff bound's R' input. Non-decreasing by construction.
struct GeometryNote {
  double max_perturbed_norm = 0.0;
  void update(std::span<const double> perturbed_rep);
};

struct DraGameState {
  Mlp encoder;       // bounded (tanh) output
  Mlp critic;        // pairwise scorer on concat(x, r + delta), scalar out
  Mlp utility_head;  // softmax over task labels
  PerturbationParams perturbation;
  GameConfig config;
  GeometryNote geometry;
  int rounds_done = 0;
  // per-round mean (jsd, perturbed CE, clean CE)
  std::vector<std::array<double, 3>> round_losses;
};

struct DraArch {
  MlpSpec encoder;
  MlpSpec critic;
  MlpSpec utility_head;
  // Shallow 2-layer encoder so reconstruction stays attackable.
  static DraArch defaults(int input_dim, int num_classes, int rep_dim,
                          int hidden = 32);
};

// beta = lambda * alpha / (1 - lambda); undefined at lambda = 1 with
// alpha > 0.
double compute_beta(double lambda, double alpha);

// Perturbation-parameter objective under fixed base draws: mean task CE of
// the utility head on r + delta(z) minus beta times the perturbation
// entropy. Each draw's delta is shared across the batch.
double dra_phi_objective(const Mlp& encoder, const Mlp& utility_head,
                         const PerturbationParams& params,
                         std::span<const Vec> xs, std::span<const int> ys,
                         double beta, std::span<const Vec> base_draws);

// Monte-Carlo SGD on the objective above: `epochs` steps, each averaging
// pathwise gradients over `mc_samples` fresh draws. Networks stay frozen.
PerturbationParams update_perturbation_params(
    const Mlp& encoder, const Mlp& utility_head, PerturbationParams params,
    std::span<const Vec> xs, std::span<const int> ys, double beta, double lr,
    int epochs, int mc_samples, Rng& rng);

struct DraLosses {
  double jsd = 0.0;       // summed JSD surrogate
  double l1_pert = 0.0;   // summed CE on perturbed representations
  double l2_clean = 0.0;  // summed CE on clean representations
};

// Game losses on a batch with explicit per-sample perturbations. Negative
// critic pairs come from an in-batch rotation by `shift` (a derangement
// for 0 < shift < batch size).
DraLosses dra_losses(const DraGameState& state,
                     std::span<const LabeledSample> batch,
                     std::span<const Vec> deltas, std::size_t shift = 1);

// Gradients of the adversary and utility phases on a frozen encoder:
// g_critic gets d(jsd_mean)/d(critic), g_util gets
// d((l1+l2)_mean)/d(utility head). Returns the summed losses.
DraLosses dra_adversary_utility_grads(const DraGameState& state,
                                      std::span<const LabeledSample> batch,
                                      std::span<const Vec> deltas,
                                      std::size_t shift, Vec* g_critic,
                                      Vec* g_util, Exec exec = Exec::Parallel);

// Encoder gradient of the combined objective
// lambda*jsd_mean + (1-lambda)*(l1+l2)_mean under the current heads.
DraLosses dra_encoder_grad(const DraGameState& state,
                           std::span<const LabeledSample> batch,
                           std::span<const Vec> deltas, std::size_t shift,
                           double lambda, Vec* g_enc,
                           Exec exec = Exec::Parallel);

// Four-phase training per batch: perturbation parameters, critic ascent on
// the JSD surrogate, utility head descent on both CE terms, encoder
// descent on lambda*JSD + (1-lambda)*(CE_pert + CE_clean). One delta draw
// per sample is shared by the critic/utility/encoder phases. Returns the
// frozen encoder and perturbation distribution.
DraGameState train_dra_defense(std::span<const LabeledSample> data,
                               const GameConfig& config, const DraArch& arch,
                               PerturbFamily family = PerturbFamily::GaussianTanh,
                               Exec exec = Exec::Parallel);

}  // namespace privrep

#endif  // PRIVREP_DEFENSE_DRA_HPP_
