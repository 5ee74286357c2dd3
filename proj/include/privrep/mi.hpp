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

#ifndef PRIVREP_MI_HPP_
#define PRIVREP_MI_HPP_

#include <span>
#include <string>

#include "privrep/common.hpp"
#include "privrep/nn.hpp"
#include "privrep/rng.hpp"

namespace privrep {

// Entropy reported when epsilon == 0 so optimizers never see -inf.
inline constexpr double kEntropySentinel = -1e9;

enum class PerturbFamily { GaussianTanh, Uniform };

// Trainable perturbation distribution: delta = epsilon * tanh(mu + sigma*z)
// with z standard normal (gaussian-tanh) or uniform on [-sqrt(3), sqrt(3)]
// (variance-1 base). Every sampled delta satisfies |delta_i| <= epsilon.
struct PerturbationParams {
  Vec mu;
  Vec log_sigma;  // sigma = exp(log_sigma) > 0
  double epsilon = 0.0;
  PerturbFamily family = PerturbFamily::GaussianTanh;

  int dim() const { return static_cast<int>(mu.size()); }
  Vec sigma() const;

  static PerturbationParams zeros(int dim, double epsilon,
                                  PerturbFamily family = PerturbFamily::GaussianTanh);
};

// Base noise z for the reparameterization path.
Vec sample_perturbation_base(const PerturbationParams& params, Rng& rng);

// delta from a fixed base draw; pathwise differentiable in (mu, log_sigma).
Vec perturbation_from_base(const PerturbationParams& params,
                           std::span<const double> base);

Vec sample_perturbation(const PerturbationParams& params, Rng& rng);

// Differential entropy of delta by change of variables through
// epsilon*tanh(.): per-dimension base entropy plus a Monte-Carlo estimate
// of E[ln(epsilon * (1 - tanh^2(mu + sigma z)))].
double perturbation_entropy(const PerturbationParams& params, int mc_samples,
                            Rng& rng);

struct EntropyEval {
  double value = 0.0;
  Vec dmu;
  Vec dlog_sigma;
};

// Entropy and its pathwise gradient under fixed base draws (common random
// numbers); the perturbation-parameter update loop consumes this.
EntropyEval perturbation_entropy_with_grad(
    const PerturbationParams& params, std::span<const Vec> base_draws);

struct MiEstimate {
  double value = 0.0;        // nats
  std::string estimator;     // "club", "ce-lower" or "jsd"
  std::size_t batch_size = 0;
};

// ---- Generic forms over log-likelihood values ----

// (1/N) sum_i log q(u_i | r_i): the adversary's maximization target,
// equal to the negative mean cross entropy.
double club_inner_objective(std::span<const double> logq_joint);

// Joint minus marginal term of the contrastive upper bound:
// (1/N) sum_i logq[i][i] - (1/N^2) sum_ij logq[i][j],
// where logq[i*n+j] = log q(u_j | r_i).
MiEstimate club_mi_value(std::span<const double> logq_matrix, std::size_t n);

// ---- Adapters over a discrete probabilistic head ----

double club_inner_objective(const Mlp& head, std::span<const Vec> reps,
                            std::span<const int> u);

MiEstimate club_mi_value(const Mlp& head, std::span<const Vec> reps,
                         std::span<const int> u);

// Variational utility surrogate -(1/N) sum_i H(y_i, head(r_i)); maximizing
// it raises the utility lower bound.
double ce_utility_objective(const Mlp& head, std::span<const Vec> reps,
                            std::span<const int> labels);

// Jensen-Shannon surrogate over critic scores, in the sum form
// sum_j[-sp(-pos_j)] - sum_j[sp(neg_j)]. Always <= 0.
double jsd_mi_objective(std::span<const double> positive_scores,
                        std::span<const double> negative_scores);

}  // namespace privrep

#endif  // PRIVREP_MI_HPP_
