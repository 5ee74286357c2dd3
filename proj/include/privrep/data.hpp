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

#ifndef PRIVREP_DATA_HPP_
#define PRIVREP_DATA_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "privrep/core.hpp"
#include "privrep/defense_pia.hpp"

namespace privrep {

// Samples plus optional per-sample attribute column and an optional grid
// shape annotation for image-style similarity metrics.
struct Dataset {
  std::vector<LabeledSample> samples;
  std::vector<int> attributes;  // empty when absent
  int num_classes = 2;
  int grid_h = 0, grid_w = 0;  // 0 means not grid-shaped
};

// Desk-scale synthetic benchmark controls. Membership leakage comes from
// overfitting a small member set, not from a distribution shift.
struct SynthSpec {
  int dim = 20;
  int num_classes = 2;
  double separation = 1.0;   // class-mean distance along a random direction
  double label_noise = 0.0;  // fraction of flipped recorded labels
  std::uint64_t seed = 1;

  // membership variant
  int n_members = 500;
  int n_nonmembers = 500;
  int n_utility_test = 2000;

  // property variant
  double attr_shift = 2.0;  // attribute effect size, orthogonal to classes
  std::vector<double> ratio_grid = {0.2, 0.3, 0.4, 0.5};
  std::pair<int, int> bag_size_range = {10, 30};
  int n_train_bags = 300;
  int n_test_bags = 100;
  int n_reference = 4000;

  // reconstruction variant
  bool grid_shaped = false;  // annotate dim as a square grid
};

struct MiaSynthTask {
  std::vector<LabeledSample> members;      // D1
  std::vector<LabeledSample> nonmembers;   // D0
  std::vector<LabeledSample> utility_test;
  int num_classes = 2;
};

// Gaussian-mixture classification data; members and non-members are drawn
// i.i.d. from the same distribution.
MiaSynthTask synth_mia_task(const SynthSpec& spec);

struct PiaSynthTask {
  Dataset train_pool;  // reference samples behind the training bags
  Dataset test_pool;
  std::vector<DatasetBag> train_bags;
  std::vector<DatasetBag> test_bags;
};

// Attribute-conditional mixture where the attribute shifts the feature
// distribution, bagged over the declared ratio grid.
PiaSynthTask synth_pia_bags(const SynthSpec& spec);

struct DraSynthTask {
  Dataset train;  // features in [0,1]
  Dataset utility_test;
  Dataset attack_test;
};

DraSynthTask synth_dra_task(const SynthSpec& spec);

// Rectangular numeric CSV with a header row. label_column is required;
// attribute_column optional. Row order is preserved.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::optional<std::string>& attribute_column = {});

void save_csv(const Dataset& data, const std::string& path,
              const std::string& label_column = "y",
              const std::optional<std::string>& attribute_column = {});

}  // namespace privrep

#endif  // PRIVREP_DATA_HPP_
