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

#ifndef PRIVREP_DEFENSE_PIA_HPP_
#define PRIVREP_DEFENSE_PIA_HPP_

#include <span>
#include <utility>
#include <vector>

#include "privrep/core.hpp"
#include "privrep/nn.hpp"

namespace privrep {

enum class AggregatorMode { Mean, Max };

// Permutation-invariant bag aggregation, componentwise.
Representation aggregate(std::span<const Representation> reps,
                         AggregatorMode mode);

// Draws `count` bags from a reference pool with a per-sample binary
// attribute. Each bag size is uniform on [size_range.first,
// size_range.second]; the attribute-1 count is round-half-even(ratio*size)
// with the ratio drawn uniformly from ratio_grid; the property label is
// the ratio's index in the grid. Deterministic per seed.
std::vector<DatasetBag> sample_bags(std::span<const LabeledSample> reference,
                                    std::span<const int> attributes,
                                    std::span<const double> ratio_grid,
                                    std::pair<int, int> size_range, int count,
                                    std::uint64_t seed);

struct PiaGameState {
  Mlp encoder;
  Mlp property_head;  // K-class over ratio-grid indices, consumes aggregates
  Mlp utility_head;
  AggregatorMode aggregator = AggregatorMode::Mean;
  GameConfig config;
  int rounds_done = 0;
  std::vector<std::pair<double, double>> round_losses;
};

struct PiaArch {
  MlpSpec encoder;
  MlpSpec property_head;
  MlpSpec utility_head;
  static PiaArch defaults(int input_dim, int num_classes, int num_properties,
                          int rep_dim, int hidden = 32);
};

// Summed losses over explicit bags:
// L1 = sum over bags of H(u, g(Agg(f(X)))),
// L2 = sum over every sample in every bag of H(y, h(f(x))).
std::pair<double, double> pia_losses(const PiaGameState& state,
                                     std::span<const LabeledSample> store,
                                     std::span<const DatasetBag> bags);

// Mean property cross entropy H(u, head(Agg(encoder(X)))) over a bag
// batch, with gradients (scaled to the mean) accumulated into non-null
// sinks. The alternating trainer steps on exactly this chain.
double property_chain_loss_grad(const Mlp& encoder, const Mlp& property_head,
                                std::span<const LabeledSample> store,
                                std::span<const DatasetBag> bags,
                                AggregatorMode mode, Vec* genc, Vec* ghead,
                                Exec exec = Exec::Parallel);

// Alternating training over a fixed pre-sampled bag pool; per inner step
// the property head descends L1 on a bag batch, the utility head descends
// L2 on the batch's samples, and the encoder ascends
// lambda*L1 - (1-lambda)*L2 (means).
PiaGameState train_pia_defense(std::span<const LabeledSample> store,
                               std::span<const DatasetBag> bags,
                               const GameConfig& config,
                               AggregatorMode aggregator, const PiaArch& arch,
                               Exec exec = Exec::Parallel);

}  // namespace privrep

#endif  // PRIVREP_DEFENSE_PIA_HPP_
