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

#include "privrep/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "privrep/rng.hpp"

namespace privrep {

void GameConfig::validate() const {
  if (lambda < 0.0 || lambda > 1.0)
    throw InvalidArgument("lambda must lie in [0,1]");
  if (alpha < 0.0) throw InvalidArgument("alpha must be >= 0");
  if (epsilon < 0.0) throw InvalidArgument("epsilon must be >= 0");
  if (alpha > 0.0 && lambda >= 1.0)
    throw InvalidArgument("beta = lambda*alpha/(1-lambda) requires lambda < 1 when alpha > 0");
  if (mc_samples <= 0 || rounds <= 0 || inner_steps <= 0 || phi_epochs <= 0)
    throw InvalidArgument("counts must be positive");
  if (lr1 <= 0.0 || lr2 <= 0.0 || lr3 <= 0.0 || phi_lr <= 0.0)
    throw InvalidArgument("learning rates must be positive");
  if (batch_size <= 0) throw InvalidArgument("batch_size must be positive");
}

DatasetReport validate_dataset(std::span<const LabeledSample> samples,
                               std::span<const int> attributes) {
  if (samples.empty()) throw EmptyDataset("validate_dataset: no samples");
  DatasetReport rep;
  rep.n = samples.size();
  rep.dimension = static_cast<int>(samples.front().features.size());
  int max_label = 0;
  for (const auto& s : samples) {
    if (static_cast<int>(s.features.size()) != rep.dimension)
      throw DimensionMismatch("validate_dataset: inconsistent feature dimension");
    if (s.label < 0) throw InvalidArgument("validate_dataset: negative label");
    max_label = std::max(max_label, s.label);
  }
  rep.num_classes = max_label + 1;
  rep.class_counts.assign(rep.num_classes, 0);
  for (const auto& s : samples) rep.class_counts[s.label]++;
  if (!attributes.empty()) {
    if (attributes.size() != samples.size())
      throw DimensionMismatch("validate_dataset: attribute count mismatch");
    int max_attr = *std::max_element(attributes.begin(), attributes.end());
    rep.attribute_counts.assign(max_attr + 1, 0);
    for (int a : attributes) {
      if (a < 0) throw InvalidArgument("validate_dataset: negative attribute");
      rep.attribute_counts[a]++;
    }
  }
  return rep;
}

namespace {

// Deterministic shuffled prefix of [base, base+n).
void split_group(std::size_t base, std::size_t n, double frac, Rng& rng,
                 std::vector<std::size_t>& train,
                 std::vector<std::size_t>& test) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), base);
  rng.shuffle(idx);
  const auto k = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
  train.insert(train.end(), idx.begin(), idx.begin() + k);
  test.insert(test.end(), idx.begin() + k, idx.end());
}

}  // namespace

SplitPlan make_split(std::size_t n_members, std::size_t n_nonmembers,
                     double attack_frac, std::uint64_t seed) {
  if (!(attack_frac > 0.0 && attack_frac < 1.0))
    throw InvalidArgument("attack_frac must lie in (0,1)");
  SplitPlan plan;
  plan.utility_train.resize(n_members);
  std::iota(plan.utility_train.begin(), plan.utility_train.end(), std::size_t{0});
  plan.utility_test.resize(n_nonmembers);
  std::iota(plan.utility_test.begin(), plan.utility_test.end(), n_members);

  Rng rng(seed);
  Rng member_rng = rng.substream("split-members");
  Rng nonmember_rng = rng.substream("split-nonmembers");
  split_group(0, n_members, attack_frac, member_rng, plan.attack_train,
              plan.attack_test);
  split_group(n_members, n_nonmembers, attack_frac, nonmember_rng,
              plan.attack_train, plan.attack_test);
  std::sort(plan.attack_train.begin(), plan.attack_train.end());
  std::sort(plan.attack_test.begin(), plan.attack_test.end());
  return plan;
}

}  // namespace privrep
