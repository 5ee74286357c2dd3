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

#ifndef PRIVREP_DEFENSE_MIA_HPP_
#define PRIVREP_DEFENSE_MIA_HPP_

#include <span>
#include <utility>
#include <vector>

#include "privrep/core.hpp"
#include "privrep/nn.hpp"

namespace privrep {

// Membership game state: encoder f, 2-class membership head g, C-class
// utility head h. Heads carry softmax outputs.
struct MiaGameState {
  Mlp encoder;
  Mlp membership_head;
  Mlp utility_head;
  GameConfig config;
  int rounds_done = 0;
  // per-round mean (membership CE, task CE)
  std::vector<std::pair<double, double>> round_losses;
};

struct MiaArch {
  MlpSpec encoder;
  MlpSpec membership_head;
  MlpSpec utility_head;

  // 2-layer tanh encoder with bounded output, relu heads.
  static MiaArch defaults(int input_dim, int num_classes, int rep_dim,
                          int hidden = 32);
};

// Inputs to one membership game. The utility term trains on all members;
// the membership term sees the attacker-visible portion of each group.
struct MiaTrainData {
  std::span<const LabeledSample> members;     // D1
  std::span<const LabeledSample> nonmembers;  // D0
  // Indices into members/nonmembers used by the membership term; empty
  // means the whole group.
  std::vector<std::size_t> l1_members;
  std::vector<std::size_t> l1_nonmembers;
};

// Summed game losses on explicit batches:
// L1 = sum over D1 u D0 of H(u, g(f(x))), L2 = sum over D1 of H(y, h(f(x))).
std::pair<double, double> mia_losses(const MiaGameState& state,
                                     std::span<const LabeledSample> d1,
                                     std::span<const LabeledSample> d0);

// Alternating min-max training: per inner step the membership head
// descends L1, the utility head descends L2, and the encoder ascends
// lambda*L1 - (1-lambda)*L2 (mini-batch means). Fixed round count, no
// early stopping; aborts on non-finite losses.
MiaGameState train_mia_defense(const MiaTrainData& data,
                               const GameConfig& config, const MiaArch& arch,
                               Exec exec = Exec::Parallel);

// Special-case objective where the protected network emits class
// confidences itself and the utility head is the identity:
// lambda * sum H(u, g(p(x))) - (1-lambda) * sum_{D1} H(y, p(x)),
// p(x) the confidence vector of the network.
double advreg_mode_loss(const Mlp& confidence_net, const Mlp& membership_head,
                        std::span<const LabeledSample> d1,
                        std::span<const LabeledSample> d0, double lambda);

struct AdvregState {
  Mlp confidence_net;   // softmax-output network X -> [0,1]^C
  Mlp membership_head;  // consumes the confidence vector
  GameConfig config;
  int rounds_done = 0;
  std::vector<std::pair<double, double>> round_losses;
};

// Same alternation with the confidence network playing the encoder role.
AdvregState train_advreg_defense(const MiaTrainData& data,
                                 const GameConfig& config, int num_classes,
                                 int hidden = 32, Exec exec = Exec::Parallel);

}  // namespace privrep

#endif  // PRIVREP_DEFENSE_MIA_HPP_
