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

#include "privrep/mi.hpp"

#include <cmath>

namespace privrep {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt3 = 1.7320508075688772;

double floored_log(double p) { return std::log(std::max(p, kProbFloor)); }

}  // namespace

Vec PerturbationParams::sigma() const {
  Vec s(log_sigma.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(log_sigma[i]);
  return s;
}

PerturbationParams PerturbationParams::zeros(int dim, double epsilon,
                                             PerturbFamily family) {
  PerturbationParams p;
  p.mu.assign(dim, 0.0);
  p.log_sigma.assign(dim, 0.0);
  p.epsilon = epsilon;
  p.family = family;
  return p;
}

Vec sample_perturbation_base(const PerturbationParams& params, Rng& rng) {
  Vec z(params.mu.size());
  for (double& v : z)
    v = params.family == PerturbFamily::GaussianTanh
            ? rng.normal()
            : rng.uniform(-kSqrt3, kSqrt3);
  return z;
}

Vec perturbation_from_base(const PerturbationParams& params,
                           std::span<const double> base) {
  if (base.size() != params.mu.size())
    throw DimensionMismatch("perturbation_from_base: base size mismatch");
  Vec delta(params.mu.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double u = params.mu[i] + std::exp(params.log_sigma[i]) * base[i];
    delta[i] = params.epsilon * std::tanh(u);
  }
  return delta;
}

Vec sample_perturbation(const PerturbationParams& params, Rng& rng) {
  const Vec z = sample_perturbation_base(params, rng);
  return perturbation_from_base(params, z);
}

namespace {

double base_entropy_per_dim(const PerturbationParams& p, std::size_t i) {
  const double log_sigma = p.log_sigma[i];
  if (p.family == PerturbFamily::GaussianTanh)
    return 0.5 * std::log(2.0 * kPi * std::exp(1.0)) + log_sigma;
  // mu + sigma*u with u uniform on [-sqrt(3), sqrt(3)] has width 2*sqrt(3)*sigma.
  return std::log(2.0 * kSqrt3) + log_sigma;
}

}  // namespace

double perturbation_entropy(const PerturbationParams& params, int mc_samples,
                            Rng& rng) {
  if (params.epsilon <= 0.0) return kEntropySentinel;
  if (mc_samples <= 0) throw InvalidArgument("mc_samples must be positive");
  const std::size_t d = params.mu.size();
  double h = 0.0;
  for (std::size_t i = 0; i < d; ++i) h += base_entropy_per_dim(params, i);
  double mc = 0.0;
  for (int k = 0; k < mc_samples; ++k) {
    const Vec z = sample_perturbation_base(params, rng);
    for (std::size_t i = 0; i < d; ++i) {
      const double u = params.mu[i] + std::exp(params.log_sigma[i]) * z[i];
      const double t = std::tanh(u);
      const double jac = std::max(params.epsilon * (1.0 - t * t), 1e-300);
      mc += std::log(jac);
    }
  }
  return h + mc / static_cast<double>(mc_samples);
}

EntropyEval perturbation_entropy_with_grad(
    const PerturbationParams& params, std::span<const Vec> base_draws) {
  const std::size_t d = params.mu.size();
  EntropyEval out;
  out.dmu.assign(d, 0.0);
  out.dlog_sigma.assign(d, 0.0);
  if (params.epsilon <= 0.0) {
    out.value = kEntropySentinel;
    return out;
  }
  if (base_draws.empty())
    throw InvalidArgument("perturbation_entropy_with_grad: no base draws");
  double h = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    h += base_entropy_per_dim(params, i);
    out.dlog_sigma[i] = 1.0;  // d(base entropy)/d(log sigma)
  }
  const double inv_k = 1.0 / static_cast<double>(base_draws.size());
  double mc = 0.0;
  for (const Vec& z : base_draws) {
    if (z.size() != d)
      throw DimensionMismatch("perturbation_entropy_with_grad: draw size");
    for (std::size_t i = 0; i < d; ++i) {
      const double sigma = std::exp(params.log_sigma[i]);
      const double u = params.mu[i] + sigma * z[i];
      const double t = std::tanh(u);
      const double jac = std::max(params.epsilon * (1.0 - t * t), 1e-300);
      mc += std::log(jac);
      // d/du ln(1 - tanh^2(u)) = -2 tanh(u)
      out.dmu[i] += -2.0 * t * inv_k;
      out.dlog_sigma[i] += -2.0 * t * sigma * z[i] * inv_k;
    }
  }
  out.value = h + mc * inv_k;
  return out;
}

double club_inner_objective(std::span<const double> logq_joint) {
  if (logq_joint.empty())
    throw EmptyDataset("club_inner_objective: empty batch");
  double s = 0.0;
  for (double v : logq_joint) s += v;
  return s / static_cast<double>(logq_joint.size());
}

MiEstimate club_mi_value(std::span<const double> logq_matrix, std::size_t n) {
  if (n < 2) throw InvalidArgument("club_mi_value: batch must be >= 2");
  if (logq_matrix.size() != n * n)
    throw DimensionMismatch("club_mi_value: matrix size mismatch");
  double joint = 0.0, marginal = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    joint += logq_matrix[i * n + i];
    for (std::size_t j = 0; j < n; ++j) marginal += logq_matrix[i * n + j];
  }
  MiEstimate est;
  est.value = joint / static_cast<double>(n) -
              marginal / static_cast<double>(n * n);
  est.estimator = "club";
  est.batch_size = n;
  return est;
}

namespace {

// Per-representation log-probability table from a probabilistic head.
std::vector<Vec> head_log_probs(const Mlp& head, std::span<const Vec> reps) {
  std::vector<Vec> out(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    Vec probs = head.forward(reps[i]);
    if (!head.spec().softmax_output) softmax_inplace(probs);
    for (double& p : probs) p = floored_log(p);
    out[i] = std::move(probs);
  }
  return out;
}

}  // namespace

double club_inner_objective(const Mlp& head, std::span<const Vec> reps,
                            std::span<const int> u) {
  if (reps.size() != u.size())
    throw DimensionMismatch("club_inner_objective: label count mismatch");
  const auto logq = head_log_probs(head, reps);
  Vec diag(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) diag[i] = logq[i][u[i]];
  return club_inner_objective(diag);
}

MiEstimate club_mi_value(const Mlp& head, std::span<const Vec> reps,
                         std::span<const int> u) {
  if (reps.size() != u.size())
    throw DimensionMismatch("club_mi_value: label count mismatch");
  const std::size_t n = reps.size();
  if (n < 2) throw InvalidArgument("club_mi_value: batch must be >= 2");
  const auto logq = head_log_probs(head, reps);
  Vec matrix(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) matrix[i * n + j] = logq[i][u[j]];
  return club_mi_value(matrix, n);
}

double ce_utility_objective(const Mlp& head, std::span<const Vec> reps,
                            std::span<const int> labels) {
  if (reps.empty()) throw EmptyDataset("ce_utility_objective: empty batch");
  if (reps.size() != labels.size())
    throw DimensionMismatch("ce_utility_objective: label count mismatch");
  const auto logq = head_log_probs(head, reps);
  double s = 0.0;
  for (std::size_t i = 0; i < reps.size(); ++i) s += logq[i][labels[i]];
  return s / static_cast<double>(reps.size());
}

double jsd_mi_objective(std::span<const double> positive_scores,
                        std::span<const double> negative_scores) {
  if (positive_scores.size() != negative_scores.size())
    throw DimensionMismatch("jsd_mi_objective: pair count mismatch");
  if (positive_scores.empty())
    throw EmptyDataset("jsd_mi_objective: empty batch");
  double s = 0.0;
  for (double p : positive_scores) {
    if (!std::isfinite(p)) throw DivergenceError("jsd_mi_objective: non-finite critic output");
    s -= softplus(-p);
  }
  for (double q : negative_scores) {
    if (!std::isfinite(q)) throw DivergenceError("jsd_mi_objective: non-finite critic output");
    s -= softplus(q);
  }
  return s;
}

}  // namespace privrep
