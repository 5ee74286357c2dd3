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

#ifndef PRIVREP_CORE_HPP_
#define PRIVREP_CORE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "privrep/common.hpp"

namespace privrep {

// One sample: dense feature vector plus a task label in {0..C-1}.
// Categorical inputs must be pre-encoded.
struct LabeledSample {
  Vec features;
  int label = 0;
};

enum class AttributeKind { Membership, Property, RawData };

// Private attribute attached to a sample or a dataset bag: a membership
// bit, a K-valued property index, or (for reconstruction threats) the
// sample itself.
struct PrivateAttribute {
  AttributeKind kind = AttributeKind::Membership;
  int value = 0;     // membership bit or property index
  Vec raw;           // populated only for kind == RawData
};

// A small dataset carrying one dataset-level property (e.g. the realized
// attribute ratio's index in the declared ratio grid).
struct DatasetBag {
  std::vector<std::size_t> sample_indices;  // into an immutable sample store
  int property_value = 0;                   // index into the ratio grid
};

// Index-based experiment split. utility_train/utility_test partition the
// samples by membership role; attack_train/attack_test partition the
// attacker's view. Disjointness is asserted at construction.
struct SplitPlan {
  std::vector<std::size_t> utility_train;
  std::vector<std::size_t> utility_test;
  std::vector<std::size_t> attack_train;
  std::vector<std::size_t> attack_test;
};

// Everything that determines one training run given a seed.
struct GameConfig {
  double lambda = 0.5;      // privacy-utility tradeoff weight, in [0,1]
  double alpha = 1.0;       // entropy weight (reconstruction game only)
  double epsilon = 0.0;     // perturbation scale, >= 0
  int mc_samples = 5;       // Monte-Carlo draws for the perturbation updates
  int rounds = 50;          // T
  int inner_steps = 1;      // I
  int phi_epochs = 1;       // epochs of the perturbation-parameter loop
  double lr1 = 1e-3;        // adversary / critic
  double lr2 = 1e-3;        // utility head
  double lr3 = 1e-3;        // encoder
  double phi_lr = 1e-2;     // perturbation parameters
  int batch_size = 64;
  std::uint64_t seed = 1;

  // beta = lambda * alpha / (1 - lambda) must stay finite when alpha > 0.
  void validate() const;
};

struct DatasetReport {
  std::size_t n = 0;
  int dimension = 0;
  int num_classes = 0;
  std::vector<std::size_t> class_counts;
  std::vector<std::size_t> attribute_counts;  // empty when no attributes given
};

// Rejects dimension mismatches and empty inputs; reports d, C and the
// class/attribute histograms.
DatasetReport validate_dataset(std::span<const LabeledSample> samples,
                               std::span<const int> attributes = {});

// Deterministic member/non-member split. Member indices are
// [0, n_members), non-member indices [n_members, n_members+n_nonmembers).
// attack_train receives attack_frac of each group, attack_test the rest;
// utility_train is all members and utility_test all non-members.
SplitPlan make_split(std::size_t n_members, std::size_t n_nonmembers,
                     double attack_frac, std::uint64_t seed);

}  // namespace privrep

#endif  // PRIVREP_CORE_HPP_
