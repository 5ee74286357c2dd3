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

#include "privrep/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "privrep/rng.hpp"
#include "train_util.hpp"

namespace privrep {

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw DimensionMismatch("mse: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr(std::span<const double> a, std::span<const double> b,
            double max_val) {
  if (max_val <= 0.0) throw InvalidArgument("psnr: max_val must be positive");
  const double m = mse(a, b);
  if (m == 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(max_val * max_val / m));
}

double ssim(std::span<const double> a, std::span<const double> b, int h, int w,
            double max_val) {
  if (h <= 0 || w <= 0 || static_cast<std::size_t>(h) * w != a.size())
    throw DimensionMismatch("ssim: grid shape does not match data");
  if (a.size() != b.size()) throw DimensionMismatch("ssim: shape mismatch");
  const int win = std::min({7, h, w});
  const double c1 = (0.01 * max_val) * (0.01 * max_val);
  const double c2 = (0.03 * max_val) * (0.03 * max_val);
  const double n = static_cast<double>(win) * win;
  double total = 0.0;
  int count = 0;
  for (int i = 0; i + win <= h; ++i) {
    for (int j = 0; j + win <= w; ++j) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int di = 0; di < win; ++di)
        for (int dj = 0; dj < win; ++dj) {
          const double va = a[(i + di) * w + (j + dj)];
          const double vb = b[(i + di) * w + (j + dj)];
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      const double ma = sa / n, mb = sb / n;
      const double va = saa / n - ma * ma;
      const double vb = sbb / n - mb * mb;
      const double cov = sab / n - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / count;
}

AttackReport roc_and_tpr(std::span<const double> scores,
                         std::span<const int> labels,
                         std::span<const double> fpr_grid) {
  if (scores.size() != labels.size() || scores.empty())
    throw DimensionMismatch("roc_and_tpr: size mismatch");
  std::size_t pos = 0, neg = 0;
  for (int l : labels) (l ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw InvalidArgument("roc_and_tpr: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] > scores[j];
  });

  AttackReport rep;
  rep.kind = "roc";
  rep.roc.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    // group ties so the sweep is threshold-based
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] ? tp : fp)++;
      ++k;
    }
    rep.roc.emplace_back(static_cast<double>(fp) / neg,
                         static_cast<double>(tp) / pos);
  }
  for (double target : fpr_grid) {
    double best = 0.0;
    for (const auto& [f, t] : rep.roc)
      if (f <= target + 1e-15) best = std::max(best, t);
    rep.tpr_at[target] = best;
  }
  return rep;
}

std::vector<Vec> encode_samples(const Mlp& encoder,
                                std::span<const LabeledSample> samples,
                                Exec exec) {
  std::vector<Vec> xs;
  xs.reserve(samples.size());
  for (const auto& s : samples) xs.push_back(s.features);
  std::vector<Vec> reps;
  batch_forward(encoder, xs, reps, exec);
  return reps;
}

double utility_accuracy(const Mlp& encoder, const Mlp& utility_head,
                        std::span<const LabeledSample> test, Exec exec) {
  return detail::chain_accuracy(encoder, utility_head, test, exec);
}

Mlp train_classifier_head(const MlpSpec& arch, std::span<const Vec> inputs,
                          std::span<const int> labels,
                          const AttackTrainConfig& cfg, std::uint64_t seed,
                          Exec exec) {
  if (inputs.empty()) throw EmptyDataset("train_classifier_head: no inputs");
  if (inputs.size() != labels.size())
    throw DimensionMismatch("train_classifier_head: label count mismatch");
  Rng rng(seed);
  Rng init = rng.substream("init");
  Rng batches = rng.substream("batches");
  Mlp head = Mlp::initialized(arch, init);
  OptimizerState opt = OptimizerState::adam(cfg.lr);
  const std::size_t n = inputs.size();
  const std::size_t bs = std::min<std::size_t>(cfg.batch_size, n);
  const std::size_t steps_per_epoch = (n + bs - 1) / bs;
  for (int e = 0; e < cfg.epochs; ++e) {
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const auto idx = detail::draw_indices(batches, n, bs);
      std::vector<Vec> bx;
      std::vector<int> by;
      bx.reserve(bs);
      by.reserve(bs);
      for (std::size_t i : idx) {
        bx.push_back(inputs[i]);
        by.push_back(labels[i]);
      }
      const LossGrad lg = ce_loss_grad(head, bx, by, exec);
      opt.step(head.params(), lg.grad);
    }
  }
  if (!head.finite())
    throw DivergenceError("train_classifier_head: non-finite parameters");
  return head;
}

namespace {

double head_accuracy(const Mlp& head, std::span<const Vec> inputs,
                     std::span<const int> labels,
                     std::vector<double>* per_class = nullptr) {
  std::size_t hits = 0;
  int num_classes = head.output_dim();
  std::vector<std::size_t> class_hits(num_classes, 0), class_counts(num_classes, 0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Vec p = head.forward(inputs[i]);
    const int pred =
        static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    class_counts[labels[i]]++;
    if (pred == labels[i]) {
      ++hits;
      class_hits[labels[i]]++;
    }
  }
  if (per_class) {
    per_class->assign(num_classes, 0.0);
    for (int c = 0; c < num_classes; ++c)
      if (class_counts[c] > 0)
        (*per_class)[c] =
            static_cast<double>(class_hits[c]) / class_counts[c];
  }
  return static_cast<double>(hits) / static_cast<double>(inputs.size());
}

}  // namespace

Mlp train_mia_attacker(const Mlp& encoder,
                       std::span<const LabeledSample> attack_train,
                       std::span<const int> u_train, const MlpSpec& head_arch,
                       const AttackTrainConfig& cfg, std::uint64_t seed,
                       Exec exec) {
  bool has0 = false, has1 = false;
  for (int u : u_train) (u ? has1 : has0) = true;
  if (!has0 || !has1)
    throw InvalidArgument("train_mia_attacker: single-class attack training set");
  const auto reps = encode_samples(encoder, attack_train, exec);
  return train_classifier_head(head_arch, reps, u_train, cfg, seed, exec);
}

AttackReport evaluate_membership_attack(const Mlp& encoder,
                                        const Mlp& classifier,
                                        std::span<const LabeledSample> test,
                                        std::span<const int> u_test,
                                        Exec exec) {
  const auto reps = encode_samples(encoder, test, exec);
  Vec scores(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i)
    scores[i] = classifier.forward(reps[i])[1];  // P(member)
  AttackReport rep = roc_and_tpr(scores, u_test);
  rep.kind = "mia";
  rep.accuracy = head_accuracy(classifier, reps, u_test, &rep.per_class_accuracy);
  return rep;
}

namespace {

double logit(double p) {
  const double q = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
  return std::log(q / (1.0 - q));
}

struct Gaussian {
  double mean = 0.0, sd = 1.0;
  double log_pdf(double x) const {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.9189385332046727;  // ln sqrt(2pi)
  }
};

Gaussian fit_gaussian(const Vec& xs) {
  Gaussian g;
  if (xs.empty()) return g;
  double s = 0.0;
  for (double x : xs) s += x;
  g.mean = s / xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - g.mean) * (x - g.mean);
  g.sd = std::sqrt(std::max(v / xs.size(), 1e-6));
  return g;
}

}  // namespace

AttackReport shadow_lira(const Mlp& encoder, const MlpSpec& head_arch,
                         std::span<const LabeledSample> attack_train,
                         std::span<const int> u_train,
                         std::span<const LabeledSample> attack_test,
                         std::span<const int> u_test, int n_shadow,
                         std::uint64_t seed, const AttackTrainConfig& cfg,
                         Exec exec) {
  if (n_shadow < 2) throw InvalidArgument("shadow_lira: n_shadow must be >= 2");
  const auto reps_train = encode_samples(encoder, attack_train, exec);
  const auto reps_test = encode_samples(encoder, attack_test, exec);

  // pooled representations; shadows never see the true membership labels
  std::vector<Vec> pool(reps_train);
  pool.insert(pool.end(), reps_test.begin(), reps_test.end());
  const std::size_t np = pool.size();
  if (np < 8) throw InvalidArgument("shadow_lira: pool too small for in/out splits");

  Rng root(seed);
  // target model: the strongest attacker trained on the true labels
  const Mlp target = train_classifier_head(
      head_arch, reps_train, u_train, cfg, root.substream("target").seed(),
      exec);

  // shadow in/out split assignments
  std::vector<std::vector<char>> in_split(
      n_shadow, std::vector<char>(np, 0));
  std::vector<Mlp> shadows;
  shadows.reserve(n_shadow);
  for (int k = 0; k < n_shadow; ++k) {
    Rng srng = root.substream("shadow", k);
    std::vector<std::size_t> idx(np);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    srng.shuffle(idx);
    std::vector<int> labels(np, 0);
    for (std::size_t i = 0; i < np / 2; ++i) {
      in_split[k][idx[i]] = 1;
      labels[idx[i]] = 1;
    }
    shadows.push_back(train_classifier_head(head_arch, pool, labels, cfg,
                                            srng.substream("train").seed(),
                                            exec));
  }

  // score the attack test targets (pool indices after the train block)
  Vec scores(reps_test.size());
  for (std::size_t i = 0; i < reps_test.size(); ++i) {
    const std::size_t pi = reps_train.size() + i;
    const double phi_t = logit(target.forward(reps_test[i])[1]);
    Vec in_conf, out_conf;
    for (int k = 0; k < n_shadow; ++k) {
      const double phi = logit(shadows[k].forward(reps_test[i])[1]);
      (in_split[k][pi] ? in_conf : out_conf).push_back(phi);
    }
    const Gaussian g_out = fit_gaussian(out_conf);
    if (static_cast<int>(in_conf.size()) < 4) {
      // offline variant: anomaly against the out distribution only
      scores[i] = (phi_t - g_out.mean) / g_out.sd;
    } else {
      const Gaussian g_in = fit_gaussian(in_conf);
      scores[i] = g_in.log_pdf(phi_t) - g_out.log_pdf(phi_t);
    }
  }
  AttackReport rep = roc_and_tpr(scores, u_test);
  rep.kind = "lira";
  // decision rule: positive likelihood ratio
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if ((scores[i] > 0.0 ? 1 : 0) == u_test[i]) ++hits;
  rep.accuracy = static_cast<double>(hits) / scores.size();
  return rep;
}

namespace {

std::vector<Vec> aggregate_bags(const Mlp& encoder,
                                std::span<const LabeledSample> store,
                                std::span<const DatasetBag> bags,
                                AggregatorMode mode, Exec exec) {
  const auto reps = encode_samples(encoder, store, exec);
  std::vector<Vec> out;
  out.reserve(bags.size());
  for (const auto& bag : bags) {
    std::vector<Vec> members;
    members.reserve(bag.sample_indices.size());
    for (std::size_t i : bag.sample_indices) members.push_back(reps[i]);
    out.push_back(aggregate(members, mode));
  }
  return out;
}

}  // namespace

PiaAttackResult train_pia_attacker(
    const Mlp& encoder, std::span<const LabeledSample> store_train,
    std::span<const DatasetBag> bags_train,
    std::span<const LabeledSample> store_test,
    std::span<const DatasetBag> bags_test, AggregatorMode aggregator,
    const MlpSpec& head_arch, const AttackTrainConfig& cfg, std::uint64_t seed,
    Exec exec) {
  const auto agg_train =
      aggregate_bags(encoder, store_train, bags_train, aggregator, exec);
  std::vector<int> labels_train;
  labels_train.reserve(bags_train.size());
  for (const auto& b : bags_train) labels_train.push_back(b.property_value);

  Mlp head = train_classifier_head(head_arch, agg_train, labels_train, cfg,
                                   seed, exec);

  const auto agg_test =
      aggregate_bags(encoder, store_test, bags_test, aggregator, exec);
  std::vector<int> labels_test;
  labels_test.reserve(bags_test.size());
  for (const auto& b : bags_test) labels_test.push_back(b.property_value);
  for (int l : labels_test)
    if (l >= head.output_dim())
      throw InvalidArgument("train_pia_attacker: unseen property class at test");

  PiaAttackResult result{std::move(head), {}};
  result.report.kind = "pia";
  result.report.accuracy = head_accuracy(result.classifier, agg_test,
                                         labels_test,
                                         &result.report.per_class_accuracy);
  return result;
}

DraAttackResult train_dra_attacker(const Mlp& encoder,
                                   const PerturbationParams& perturbation,
                                   std::span<const LabeledSample> train,
                                   std::span<const LabeledSample> attack_test,
                                   int grid_h, int grid_w,
                                   const AttackTrainConfig& cfg,
                                   std::uint64_t seed, Exec exec) {
  if (train.empty() || attack_test.empty())
    throw EmptyDataset("train_dra_attacker: empty data");
  const int d = static_cast<int>(train.front().features.size());
  const int m = encoder.output_dim();
  if (perturbation.dim() != m)
    throw DimensionMismatch("train_dra_attacker: perturbation dimension mismatch");

  Rng root(seed);
  Rng noise = root.substream("noise");

  auto perturbed_reps = [&](std::span<const LabeledSample> samples) {
    auto reps = encode_samples(encoder, samples, exec);
    for (auto& r : reps) {
      const Vec delta = sample_perturbation(perturbation, noise);
      for (int i = 0; i < m; ++i) r[i] += delta[i];
    }
    return reps;
  };

  const auto inputs = perturbed_reps(train);
  std::vector<Vec> targets;
  targets.reserve(train.size());
  for (const auto& s : train) targets.push_back(s.features);

  MlpSpec dec_spec{{m, 64, d}, Activation::Relu, false, false};
  Rng init = root.substream("init");
  Mlp decoder = Mlp::initialized(dec_spec, init);
  OptimizerState opt = OptimizerState::adam(cfg.lr);
  Rng batches = root.substream("batches");
  const std::size_t n = inputs.size();
  const std::size_t bs = std::min<std::size_t>(cfg.batch_size, n);
  const std::size_t steps_per_epoch = (n + bs - 1) / bs;
  for (int e = 0; e < cfg.epochs; ++e) {
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const auto idx = detail::draw_indices(batches, n, bs);
      std::vector<Vec> bx, bt;
      bx.reserve(bs);
      bt.reserve(bs);
      for (std::size_t i : idx) {
        bx.push_back(inputs[i]);
        bt.push_back(targets[i]);
      }
      const LossGrad lg = mse_loss_grad(decoder, bx, bt, exec);
      opt.step(decoder.params(), lg.grad);
    }
  }

  DraAttackResult result{std::move(decoder), {}};
  const auto test_inputs = perturbed_reps(attack_test);
  double sum_mse = 0.0, sum_ssim = 0.0, sum_psnr = 0.0;
  const bool image = grid_h > 0 && grid_w > 0;
  for (std::size_t i = 0; i < test_inputs.size(); ++i) {
    const Vec rec = result.decoder.forward(test_inputs[i]);
    const double m2 = mse(rec, attack_test[i].features);
    result.report.per_sample_mse.push_back(m2);
    sum_mse += m2;
    if (image) {
      sum_ssim += ssim(rec, attack_test[i].features, grid_h, grid_w);
      sum_psnr += psnr(rec, attack_test[i].features, 1.0);
    }
  }
  const double inv = 1.0 / static_cast<double>(test_inputs.size());
  result.report.mean_mse = sum_mse * inv;
  if (image) {
    result.report.mean_ssim = sum_ssim * inv;
    result.report.mean_psnr = sum_psnr * inv;
    result.report.has_image_metrics = true;
  }
  return result;
}

}  // namespace privrep
