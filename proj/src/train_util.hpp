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

// Internal helpers shared by the defense trainers and attack harness.

#ifndef PRIVREP_TRAIN_UTIL_HPP_
#define PRIVREP_TRAIN_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "privrep/core.hpp"
#include "privrep/nn.hpp"
#include "privrep/rng.hpp"

namespace privrep::detail {

inline std::vector<std::size_t> draw_indices(Rng& rng, std::size_t pool,
                                             std::size_t count) {
  std::vector<std::size_t> out(count);
  for (auto& i : out) i = rng.uniform_index(pool);
  return out;
}

inline std::vector<Vec> gather_features(std::span<const LabeledSample> samples,
                                        std::span<const std::size_t> idx) {
  std::vector<Vec> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(samples[i].features);
  return out;
}

inline std::vector<int> gather_labels(std::span<const LabeledSample> samples,
                                      std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(samples[i].label);
  return out;
}

// dL/dp for cross entropy against a probabilistic head output.
inline Vec ce_prob_delta(const Vec& probs, int label) {
  Vec delta(probs.size(), 0.0);
  delta[label] = -1.0 / std::max(probs[label], kProbFloor);
  return delta;
}

inline double ce_chain_batch(const Mlp& encoder, const Mlp& head,
                             std::span<const Vec> xs, std::span<const int> ys,
                             Vec* genc, Vec* ghead, Exec exec) {
  return chain_ce_loss_grad(encoder, head, xs, ys, genc, ghead, exec);
}

// Accuracy of argmax(head(encoder(x))) against labels.
inline double chain_accuracy(const Mlp& encoder, const Mlp& head,
                             std::span<const LabeledSample> samples,
                             Exec exec = Exec::Parallel) {
  if (samples.empty()) throw EmptyDataset("chain_accuracy: empty set");
  std::vector<Vec> xs;
  xs.reserve(samples.size());
  for (const auto& s : samples) xs.push_back(s.features);
  std::vector<Vec> reps;
  batch_forward(encoder, xs, reps, exec);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const Vec out = head.forward(reps[i]);
    const auto mx = std::max_element(out.begin(), out.end());
    if (static_cast<int>(mx - out.begin()) == samples[i].label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

}  // namespace privrep::detail

#endif  // PRIVREP_TRAIN_UTIL_HPP_
