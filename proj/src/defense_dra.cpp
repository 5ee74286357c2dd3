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

#include "privrep/defense_dra.hpp"

#include <algorithm>
#include <cmath>

#include "privrep/rng.hpp"
#include "train_util.hpp"

namespace privrep {

void GeometryNote::update(std::span<const double> perturbed_rep) {
  double sq = 0.0;
  for (double v : perturbed_rep) sq += v * v;
  max_perturbed_norm = std::max(max_perturbed_norm, std::sqrt(sq));
}

DraArch DraArch::defaults(int input_dim, int num_classes, int rep_dim,
                          int hidden) {
  DraArch a;
  a.encoder = MlpSpec{{input_dim, hidden, rep_dim}, Activation::Tanh, true, false};
  a.critic =
      MlpSpec{{input_dim + rep_dim, hidden, 1}, Activation::Relu, false, false};
  a.utility_head =
      MlpSpec{{rep_dim, hidden, num_classes}, Activation::Relu, false, true};
  return a;
}

double compute_beta(double lambda, double alpha) {
  if (lambda < 0.0 || lambda > 1.0)
    throw InvalidArgument("compute_beta: lambda must lie in [0,1]");
  if (alpha < 0.0) throw InvalidArgument("compute_beta: alpha must be >= 0");
  if (alpha == 0.0) return 0.0;
  if (lambda >= 1.0)
    throw InvalidArgument("compute_beta: undefined at lambda = 1 with alpha > 0");
  return lambda * alpha / (1.0 - lambda);
}

namespace {

Vec add(const Vec& a, const Vec& b) {
  Vec out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

double dra_phi_objective(const Mlp& encoder, const Mlp& utility_head,
                         const PerturbationParams& params,
                         std::span<const Vec> xs, std::span<const int> ys,
                         double beta, std::span<const Vec> base_draws) {
  if (xs.empty()) throw EmptyDataset("dra_phi_objective: empty batch");
  if (base_draws.empty())
    throw InvalidArgument("dra_phi_objective: no base draws");
  std::vector<Vec> reps;
  batch_forward(encoder, xs, reps, Exec::Serial);
  double ce = 0.0;
  for (const Vec& z : base_draws) {
    const Vec delta = perturbation_from_base(params, z);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const Vec p = utility_head.forward(add(reps[j], delta));
      ce += ce_from_probs(p, ys[j]);
    }
  }
  ce /= static_cast<double>(base_draws.size() * xs.size());
  if (beta == 0.0) return ce;
  const EntropyEval ent = perturbation_entropy_with_grad(params, base_draws);
  return ce - beta * ent.value;
}

PerturbationParams update_perturbation_params(
    const Mlp& encoder, const Mlp& utility_head, PerturbationParams params,
    std::span<const Vec> xs, std::span<const int> ys, double beta, double lr,
    int epochs, int mc_samples, Rng& rng) {
  if (xs.empty())
    throw EmptyDataset("update_perturbation_params: empty batch");
  if (epochs <= 0 || mc_samples <= 0)
    throw InvalidArgument("update_perturbation_params: counts must be positive");
  if (params.epsilon == 0.0) return params;  // delta is identically zero

  const std::size_t m = params.mu.size();
  std::vector<Vec> reps;
  batch_forward(encoder, xs, reps, Exec::Serial);

  for (int e = 0; e < epochs; ++e) {
    std::vector<Vec> draws(mc_samples);
    for (auto& z : draws) z = sample_perturbation_base(params, rng);

    Vec dmu(m, 0.0), dls(m, 0.0);
    const Vec sigma = params.sigma();
    const double inv = 1.0 / static_cast<double>(mc_samples * xs.size());
    for (const Vec& z : draws) {
      Vec delta(m), dtanh(m);
      for (std::size_t i = 0; i < m; ++i) {
        const double u = params.mu[i] + sigma[i] * z[i];
        const double t = std::tanh(u);
        delta[i] = params.epsilon * t;
        dtanh[i] = params.epsilon * (1.0 - t * t);
      }
      for (std::size_t j = 0; j < xs.size(); ++j) {
        Mlp::Cache hc;
        utility_head.forward_cached(add(reps[j], delta), hc);
        Vec hgrad(utility_head.num_params(), 0.0);
        Vec ddelta;
        utility_head.backward(hc, detail::ce_prob_delta(hc.output(), ys[j]),
                              hgrad, &ddelta);
        for (std::size_t i = 0; i < m; ++i) {
          dmu[i] += inv * ddelta[i] * dtanh[i];
          dls[i] += inv * ddelta[i] * dtanh[i] * sigma[i] * z[i];
        }
      }
    }
    if (beta != 0.0) {
      const EntropyEval ent = perturbation_entropy_with_grad(params, draws);
      for (std::size_t i = 0; i < m; ++i) {
        dmu[i] -= beta * ent.dmu[i];
        dls[i] -= beta * ent.dlog_sigma[i];
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      params.mu[i] -= lr * dmu[i];
      params.log_sigma[i] -= lr * dls[i];
      if (!std::isfinite(params.mu[i]) || !std::isfinite(params.log_sigma[i]))
        throw DivergenceError("update_perturbation_params: non-finite parameters");
    }
  }
  return params;
}

DraLosses dra_losses(const DraGameState& state,
                     std::span<const LabeledSample> batch,
                     std::span<const Vec> deltas, std::size_t shift) {
  return dra_adversary_utility_grads(state, batch, deltas, shift, nullptr,
                                     nullptr, Exec::Serial);
}

namespace {

// Critic deltas for the summed JSD surrogate: d(jsd)/d(pos score) and
// d(jsd)/d(neg score).
inline double djsd_dpos(double s) { return sigmoid(-s); }
inline double djsd_dneg(double s) { return -sigmoid(s); }

void validate_dra_batch(std::span<const LabeledSample> batch,
                        std::span<const Vec> deltas, std::size_t shift) {
  if (batch.size() < 2)
    throw InvalidArgument("dra batch must be >= 2 for negatives");
  if (deltas.size() != batch.size())
    throw DimensionMismatch("dra batch: one delta per sample required");
  if (shift == 0 || shift >= batch.size())
    throw InvalidArgument("dra batch: shift must give a derangement");
}

}  // namespace

DraLosses dra_adversary_utility_grads(const DraGameState& state,
                                      std::span<const LabeledSample> batch,
                                      std::span<const Vec> deltas,
                                      std::size_t shift, Vec* g_critic,
                                      Vec* g_util, Exec exec) {
  validate_dra_batch(batch, deltas, shift);
  const std::size_t n = batch.size();
  Vec dummy;
  // loss sums ride along as single-element sinks
  Vec l1_sink(1, 0.0), l2_sink(1, 0.0);
  Vec* all_sinks[4] = {g_critic ? g_critic : &dummy,
                       g_util ? g_util : &dummy, &l1_sink, &l2_sink};
  const double jsd_sum = batch_reduce(
      n, exec, std::span<Vec* const>(all_sinks, 4),
      [&](std::size_t j, std::span<Vec* const> g) {
        Mlp::Cache ec;
        state.encoder.forward_cached(batch[j].features, ec);
        const Vec& r = ec.output();
        const Vec rp = add(r, deltas[j]);

        Mlp::Cache cp, cn;
        state.critic.forward_cached(concat(batch[j].features, rp), cp);
        const double sp = cp.output()[0];
        const std::size_t jn = (j + shift) % n;
        state.critic.forward_cached(concat(batch[jn].features, rp), cn);
        const double sn = cn.output()[0];
        if (g_critic) {
          state.critic.backward(cp, Vec{djsd_dpos(sp) / double(n)}, *g[0]);
          state.critic.backward(cn, Vec{djsd_dneg(sn) / double(n)}, *g[0]);
        }

        Mlp::Cache hp, hc;
        state.utility_head.forward_cached(rp, hp);
        const double l1 = ce_from_probs(hp.output(), batch[j].label);
        state.utility_head.forward_cached(r, hc);
        const double l2 = ce_from_probs(hc.output(), batch[j].label);
        if (g_util) {
          state.utility_head.backward(
              hp, detail::ce_prob_delta(hp.output(), batch[j].label), *g[1]);
          state.utility_head.backward(
              hc, detail::ce_prob_delta(hc.output(), batch[j].label), *g[1]);
        }
        (*g[2])[0] += l1;
        (*g[3])[0] += l2;
        return -softplus(-sp) - softplus(sn);
      });
  if (g_util)
    for (double& v : *g_util) v /= static_cast<double>(n);
  DraLosses out;
  out.jsd = jsd_sum;
  out.l1_pert = l1_sink[0];
  out.l2_clean = l2_sink[0];
  check_finite(out.jsd + out.l1_pert + out.l2_clean,
               "dra_adversary_utility_grads");
  return out;
}

DraLosses dra_encoder_grad(const DraGameState& state,
                           std::span<const LabeledSample> batch,
                           std::span<const Vec> deltas, std::size_t shift,
                           double lambda, Vec* g_enc, Exec exec) {
  validate_dra_batch(batch, deltas, shift);
  const std::size_t n = batch.size();
  Vec dummy;
  Vec l1_sink(1, 0.0), l2_sink(1, 0.0);
  Vec* sinks[3] = {g_enc ? g_enc : &dummy, &l1_sink, &l2_sink};
  const double jsd_sum = batch_reduce(
      n, exec, std::span<Vec* const>(sinks, 3),
      [&](std::size_t j, std::span<Vec* const> g) {
        Mlp::Cache ec;
        state.encoder.forward_cached(batch[j].features, ec);
        const Vec& r = ec.output();
        const Vec rp = add(r, deltas[j]);
        const std::size_t m = r.size();
        Vec dr(m, 0.0);

        Mlp::Cache cp, cn;
        state.critic.forward_cached(concat(batch[j].features, rp), cp);
        const double sp = cp.output()[0];
        const std::size_t jn = (j + shift) % n;
        state.critic.forward_cached(concat(batch[jn].features, rp), cn);
        const double sn = cn.output()[0];
        if (g_enc && lambda > 0.0) {
          Vec scratch(state.critic.num_params(), 0.0);
          Vec din;
          state.critic.backward(cp, Vec{lambda * djsd_dpos(sp)}, scratch, &din);
          for (std::size_t k = 0; k < m; ++k)
            dr[k] += din[batch[j].features.size() + k];
          state.critic.backward(cn, Vec{lambda * djsd_dneg(sn)}, scratch, &din);
          for (std::size_t k = 0; k < m; ++k)
            dr[k] += din[batch[j].features.size() + k];
        }

        Mlp::Cache hp, hc;
        state.utility_head.forward_cached(rp, hp);
        const double l1 = ce_from_probs(hp.output(), batch[j].label);
        state.utility_head.forward_cached(r, hc);
        const double l2 = ce_from_probs(hc.output(), batch[j].label);
        if (g_enc && lambda < 1.0) {
          Vec scratch(state.utility_head.num_params(), 0.0);
          Vec din;
          state.utility_head.backward(
              hp, detail::ce_prob_delta(hp.output(), batch[j].label), scratch,
              &din);
          for (std::size_t k = 0; k < m; ++k) dr[k] += (1.0 - lambda) * din[k];
          state.utility_head.backward(
              hc, detail::ce_prob_delta(hc.output(), batch[j].label), scratch,
              &din);
          for (std::size_t k = 0; k < m; ++k) dr[k] += (1.0 - lambda) * din[k];
        }
        if (g_enc) state.encoder.backward(ec, std::move(dr), *g[0]);
        (*g[1])[0] += l1;
        (*g[2])[0] += l2;
        return -softplus(-sp) - softplus(sn);
      });
  if (g_enc)
    for (double& v : *g_enc) v /= static_cast<double>(n);
  DraLosses out;
  out.jsd = jsd_sum;
  out.l1_pert = l1_sink[0];
  out.l2_clean = l2_sink[0];
  check_finite(out.jsd + out.l1_pert + out.l2_clean, "dra_encoder_grad");
  return out;
}

DraGameState train_dra_defense(std::span<const LabeledSample> data,
                               const GameConfig& config, const DraArch& arch,
                               PerturbFamily family, Exec exec) {
  config.validate();
  if (data.size() < 2) throw EmptyDataset("train_dra_defense: need >= 2 samples");

  Rng root(config.seed);
  Rng init = root.substream("init");
  Rng batches = root.substream("batches");
  Rng noise = root.substream("noise");

  const int m = arch.encoder.widths.back();
  DraGameState state{Mlp::initialized(arch.encoder, init),
                     Mlp::initialized(arch.critic, init),
                     Mlp::initialized(arch.utility_head, init),
                     PerturbationParams::zeros(m, config.epsilon, family),
                     config};

  OptimizerState opt_psi = OptimizerState::adam(config.lr1);
  OptimizerState opt_omega = OptimizerState::adam(config.lr2);
  OptimizerState opt_theta = OptimizerState::adam(config.lr3);
  const double lambda = config.lambda;
  const double beta = compute_beta(lambda, config.alpha);
  const std::size_t n_batch = static_cast<std::size_t>(config.batch_size);

  for (int t = 0; t < config.rounds; ++t) {
    double round_jsd = 0.0, round_l1 = 0.0, round_l2 = 0.0;
    for (int i = 0; i < config.inner_steps; ++i) {
      std::vector<LabeledSample> batch;
      std::vector<Vec> xs;
      std::vector<int> ys;
      for (std::size_t k = 0; k < n_batch; ++k) {
        batch.push_back(data[batches.uniform_index(data.size())]);
        xs.push_back(batch.back().features);
        ys.push_back(batch.back().label);
      }
      const std::size_t n = batch.size();

      // phase 1: perturbation distribution
      state.perturbation = update_perturbation_params(
          state.encoder, state.utility_head, state.perturbation, xs, ys, beta,
          config.phi_lr, config.phi_epochs, config.mc_samples, noise);

      // one delta per sample, shared by the remaining phases
      std::vector<Vec> deltas(n);
      for (auto& d : deltas) d = sample_perturbation(state.perturbation, noise);
      const std::size_t shift = 1 + noise.uniform_index(n - 1);

      // phases 2+3: critic ascends the JSD surrogate, utility head
      // descends both CE terms (both on the frozen encoder)
      Vec g_critic(state.critic.num_params(), 0.0);
      Vec g_util(state.utility_head.num_params(), 0.0);
      const DraLosses adv = dra_adversary_utility_grads(
          state, batch, deltas, shift, &g_critic, &g_util, exec);
      for (double& v : g_critic) v = -v;  // ascent as descent on the negation
      opt_psi.step(state.critic.params(), g_critic);
      opt_omega.step(state.utility_head.params(), g_util);
      round_jsd += adv.jsd / static_cast<double>(n);

      // phase 4: encoder descends lambda*JSD + (1-lambda)*(L1 + L2) with
      // the freshly updated heads
      Vec g_enc(state.encoder.num_params(), 0.0);
      const DraLosses enc =
          dra_encoder_grad(state, batch, deltas, shift, lambda, &g_enc, exec);
      opt_theta.step(state.encoder.params(), g_enc);
      round_l1 += enc.l1_pert / static_cast<double>(n);
      round_l2 += enc.l2_clean / static_cast<double>(n);

      // geometry bookkeeping on the updated encoder
      std::vector<Vec> reps;
      batch_forward(state.encoder, xs, reps, exec);
      for (std::size_t j = 0; j < n; ++j)
        state.geometry.update(add(reps[j], deltas[j]));
    }
    if (!state.encoder.finite() || !state.critic.finite() ||
        !state.utility_head.finite())
      throw DivergenceError("train_dra_defense: non-finite parameters at round " +
                            std::to_string(t));
    state.round_losses.push_back({round_jsd / config.inner_steps,
                                  round_l1 / config.inner_steps,
                                  round_l2 / config.inner_steps});
    state.rounds_done = t + 1;
  }
  return state;
}

}  // namespace privrep
