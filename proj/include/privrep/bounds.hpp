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

#ifndef PRIVREP_BOUNDS_HPP_
#define PRIVREP_BOUNDS_HPP_

#include <span>
#include <string>
#include <utility>

#include "privrep/core.hpp"
#include "privrep/nn.hpp"

namespace privrep {

// Lower bound p / (2 log2(6/p)) on the inverse binary entropy, p in (0,1].
double inv_binary_entropy_lower(double p);

// Exact inverse H2^{-1}(p) on [0, 1/2] by bisection; companion oracle for
// the closed-form lower bound.
double inv_binary_entropy_exact(double p);

// Cap on any attacker's accuracy given the conditional entropy of the
// private bit (in bits): 1 - H / (2 log2(6/H)); vacuous 1.0 at H = 0.
// The same formula serves individual and dataset-level representations.
double mia_leakage_bound(double h_cond_bits);

struct LeakageBoundResult {
  double h_cond_bits = 0.0;
  double bound = 1.0;
  std::string estimator_note;  // plug-in vs cross-entropy; always an estimate
};

struct CondEntropyEstimates {
  double plug_in_bits = 0.0;  // mean posterior entropy of the head
  double ce_upper_bits = 0.0; // -mean log2 q(u_i | r_i); >= H(u|r) in expectation
};

// Both H(u|r) estimates from a frozen encoder and an adversary head.
// Neither certifies the bound: plug-in can under-estimate, cross-entropy
// over-estimates by the head's KL gap.
CondEntropyEstimates conditional_entropy_estimates(
    const Mlp& encoder, const Mlp& adversary_head,
    std::span<const LabeledSample> eval, std::span<const int> u);

// Same estimates over precomputed (possibly aggregated) representations.
CondEntropyEstimates conditional_entropy_from_reps(const Mlp& adversary_head,
                                                   std::span<const Vec> reps,
                                                   std::span<const int> u);

// Geometry constants for the reconstruction-error bound. Boundary volumes
// are user-overridable; the hypercube helper approximates the eta-ball
// boundary by the full sphere surface.
struct GeometrySpec {
  int dim = 1;
  double vol_boundary_x = 0.0;
  double vol_boundary_eta = 0.0;

  static GeometrySpec unit_hypercube(int dim, double eta);
};

// Lower bound on the probability that any reconstructor errs by at least
// eta: clamp_[0,1](1 - (I + ln 2) / (ln Vol_x - ln Vol_eta)), natural logs.
double dra_error_bound(double mi_nats, const GeometrySpec& geom);

enum class TradeoffVariant { Mia, Pia, Dra };

struct TradeoffInputs {
  double delta = 0.0;      // task-dependent constant
  double r_bound = 0.0;    // representation norm bound (R or R')
  double lipschitz = 0.0;  // task-head Lipschitz constant
  double advantage = 0.0;  // attacker advantage in [0,1]
};

// Risk lower bound max(0, delta - 2 R C_L Adv).
double tradeoff_bound(const TradeoffInputs& in, TradeoffVariant variant);

// max over a of |Pr(A=a | u=a) - Pr(A=a | u=1-a)| for binary attacks;
// equals |TPR - FPR|.
double empirical_advantage(std::span<const int> decisions,
                           std::span<const int> u);

// Reconstruction advantage over the eta-exact success event, conditioned
// on the binary task label.
double empirical_advantage_dra(std::span<const int> success,
                               std::span<const int> y);

// (Delta_{y|u}, Delta_y) for a binary task.
std::pair<double, double> delta_constants(std::span<const int> y,
                                          std::span<const int> u);

// Certified Lipschitz upper bound: product of layer spectral norms
// (power iteration), valid for 1-Lipschitz activations.
double lipschitz_upper(const Mlp& model);

}  // namespace privrep

#endif  // PRIVREP_BOUNDS_HPP_
