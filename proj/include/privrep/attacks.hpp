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

#ifndef PRIVREP_ATTACKS_HPP_
#define PRIVREP_ATTACKS_HPP_

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "privrep/core.hpp"
#include "privrep/defense_pia.hpp"
#include "privrep/mi.hpp"
#include "privrep/nn.hpp"

namespace privrep {

struct AttackReport {
  std::string kind;
  double accuracy = 0.0;
  std::vector<std::pair<double, double>> roc;  // (fpr, tpr)
  std::map<double, double> tpr_at;             // requested fpr -> tpr
  std::vector<double> per_class_accuracy;
};

struct ReconReport {
  std::vector<double> per_sample_mse;
  double mean_mse = 0.0;
  double mean_ssim = 0.0;   // grid-shaped data only
  double mean_psnr = 0.0;
  bool has_image_metrics = false;
};

// ---- similarity metrics ----

double mse(std::span<const double> a, std::span<const double> b);

// 10*log10(max_val^2 / mse), capped at 100 dB.
double psnr(std::span<const double> a, std::span<const double> b,
            double max_val);

// Windowed SSIM with a uniform min(7,h,w) window and the standard
// stabilizers C1=(0.01 L)^2, C2=(0.03 L)^2.
double ssim(std::span<const double> a, std::span<const double> b, int h, int w,
            double max_val = 1.0);

// ---- score-level evaluation ----

inline const std::vector<double>& default_fpr_grid() {
  static const std::vector<double> grid = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1};
  return grid;
}

// Threshold sweep over scores. ROC is monotone and anchored at (0,0) and
// (1,1); tpr_at uses step interpolation (largest TPR with FPR <= target).
AttackReport roc_and_tpr(std::span<const double> scores,
                         std::span<const int> labels,
                         std::span<const double> fpr_grid = default_fpr_grid());

// ---- attack classifier training ----

struct AttackTrainConfig {
  int epochs = 150;
  int batch_size = 64;
  double lr = 1e-3;
};

// Adam-trained classifier head on fixed inputs; the common core behind the
// strongest-attacker harness and the shadow models.
Mlp train_classifier_head(const MlpSpec& arch, std::span<const Vec> inputs,
                          std::span<const int> labels,
                          const AttackTrainConfig& cfg, std::uint64_t seed,
                          Exec exec = Exec::Parallel);

std::vector<Vec> encode_samples(const Mlp& encoder,
                                std::span<const LabeledSample> samples,
                                Exec exec = Exec::Parallel);

double utility_accuracy(const Mlp& encoder, const Mlp& utility_head,
                        std::span<const LabeledSample> test,
                        Exec exec = Exec::Parallel);

// Strongest membership attacker: same architecture and attack training set
// as the defense's adversary head, retrained from scratch on the frozen
// encoder's representations.
Mlp train_mia_attacker(const Mlp& encoder,
                       std::span<const LabeledSample> attack_train,
                       std::span<const int> u_train, const MlpSpec& head_arch,
                       const AttackTrainConfig& cfg, std::uint64_t seed,
                       Exec exec = Exec::Parallel);

// Accuracy + ROC of a membership classifier on held-out samples.
AttackReport evaluate_membership_attack(const Mlp& encoder,
                                        const Mlp& classifier,
                                        std::span<const LabeledSample> test,
                                        std::span<const int> u_test,
                                        Exec exec = Exec::Parallel);

// Shadow-model likelihood-ratio attack on representations. Shadow
// membership heads are trained on random in/out halves of the pooled
// train+test representations; per-target Gaussians are fitted to the
// shadows' logit-scaled confidences and the likelihood ratio scores the
// target head's confidence. Falls back to an out-only (offline) fit when
// a target has fewer than 4 in-models.
AttackReport shadow_lira(const Mlp& encoder, const MlpSpec& head_arch,
                         std::span<const LabeledSample> attack_train,
                         std::span<const int> u_train,
                         std::span<const LabeledSample> attack_test,
                         std::span<const int> u_test, int n_shadow,
                         std::uint64_t seed, const AttackTrainConfig& cfg,
                         Exec exec = Exec::Parallel);

struct PiaAttackResult {
  Mlp classifier;
  AttackReport report;
};

// K-class property attacker on aggregated bag representations. Pass the
// defense's aggregator for the matched attack or another for the
// substitute-aggregator ablation.
PiaAttackResult train_pia_attacker(
    const Mlp& encoder, std::span<const LabeledSample> store_train,
    std::span<const DatasetBag> bags_train,
    std::span<const LabeledSample> store_test,
    std::span<const DatasetBag> bags_test, AggregatorMode aggregator,
    const MlpSpec& head_arch, const AttackTrainConfig& cfg, std::uint64_t seed,
    Exec exec = Exec::Parallel);

struct DraAttackResult {
  Mlp decoder;
  ReconReport report;
};

// Reconstruction attacker: a decoder trained by MSE on (perturbed
// representation, input) pairs, granted the encoder and the published
// perturbation distribution.
DraAttackResult train_dra_attacker(const Mlp& encoder,
                                   const PerturbationParams& perturbation,
                                   std::span<const LabeledSample> train,
                                   std::span<const LabeledSample> attack_test,
                                   int grid_h, int grid_w,
                                   const AttackTrainConfig& cfg,
                                   std::uint64_t seed,
                                   Exec exec = Exec::Parallel);

}  // namespace privrep

#endif  // PRIVREP_ATTACKS_HPP_
