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

#include "privrep/nn.hpp"

#include <algorithm>
#include <cmath>

namespace privrep {

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.widths.size() < 2)
    throw InvalidArgument("Mlp needs at least input and output widths");
  for (int w : spec_.widths)
    if (w <= 0) throw InvalidArgument("Mlp widths must be positive");
  if (spec_.activate_output && spec_.softmax_output)
    throw InvalidArgument("activate_output and softmax_output are exclusive");
  std::size_t total = 0;
  offsets_.reserve(spec_.widths.size() - 1);
  for (std::size_t l = 0; l + 1 < spec_.widths.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(spec_.widths[l]) * spec_.widths[l + 1] +
             spec_.widths[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::initialized(MlpSpec spec, Rng& rng) {
  Mlp net(std::move(spec));
  for (int l = 0; l < net.num_layers(); ++l) {
    const int fan_in = net.spec_.widths[l];
    const int fan_out = net.spec_.widths[l + 1];
    const double limit =
        net.spec_.activation == Activation::Relu
            ? std::sqrt(6.0 / fan_in)
            : std::sqrt(6.0 / (fan_in + fan_out));
    const std::size_t w0 = net.weight_offset(l);
    const std::size_t nw = static_cast<std::size_t>(fan_in) * fan_out;
    for (std::size_t i = 0; i < nw; ++i)
      net.params_[w0 + i] = rng.uniform(-limit, limit);
    // biases stay zero
  }
  return net;
}

namespace {

inline double apply_act(double z, Activation a) {
  return a == Activation::Tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative expressed through the stored activation value.
inline double act_deriv(double a_val, Activation a) {
  return a == Activation::Tanh ? 1.0 - a_val * a_val : (a_val > 0.0 ? 1.0 : 0.0);
}

}  // namespace

void Mlp::forward_cached(std::span<const double> x, Cache& cache) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw DimensionMismatch("Mlp::forward: input dimension mismatch");
  const int L = num_layers();
  cache.acts.resize(L + 1);
  cache.acts[0].assign(x.begin(), x.end());
  for (int l = 0; l < L; ++l) {
    const int in_w = spec_.widths[l];
    const int out_w = spec_.widths[l + 1];
    const bool activated = (l + 1 < L) || spec_.activate_output;
    const double* W = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    const Vec& in = cache.acts[l];
    Vec& out = cache.acts[l + 1];
    out.assign(out_w, 0.0);
    for (int r = 0; r < out_w; ++r) {
      double z = b[r];
      const double* row = W + static_cast<std::size_t>(r) * in_w;
      for (int c = 0; c < in_w; ++c) z += row[c] * in[c];
      out[r] = activated ? apply_act(z, spec_.activation) : z;
    }
  }
  if (spec_.softmax_output) softmax_inplace(cache.acts.back());
}

Vec Mlp::forward(std::span<const double> x) const {
  Cache cache;
  forward_cached(x, cache);
  return cache.acts.back();
}

void Mlp::backward(const Cache& cache, Vec dout, Vec& grad,
                   Vec* dinput) const {
  if (grad.size() != params_.size())
    throw DimensionMismatch("Mlp::backward: gradient buffer size mismatch");
  const int L = num_layers();
  if (static_cast<int>(dout.size()) != output_dim())
    throw DimensionMismatch("Mlp::backward: dout dimension mismatch");
  Vec delta = std::move(dout);
  if (spec_.softmax_output) {
    // dL/dz_k = p_k (dL/dp_k - sum_j p_j dL/dp_j)
    const Vec& p = cache.acts.back();
    double dot = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) dot += p[k] * delta[k];
    for (std::size_t k = 0; k < p.size(); ++k) delta[k] = p[k] * (delta[k] - dot);
  }
  for (int l = L - 1; l >= 0; --l) {
    const int in_w = spec_.widths[l];
    const int out_w = spec_.widths[l + 1];
    const bool activated = (l + 1 < L) || spec_.activate_output;
    if (activated) {
      const Vec& a = cache.acts[l + 1];
      for (int r = 0; r < out_w; ++r)
        delta[r] *= act_deriv(a[r], spec_.activation);
    }
    const Vec& in = cache.acts[l];
    double* gW = grad.data() + weight_offset(l);
    double* gb = grad.data() + bias_offset(l);
    for (int r = 0; r < out_w; ++r) {
      double* grow = gW + static_cast<std::size_t>(r) * in_w;
      for (int c = 0; c < in_w; ++c) grow[c] += delta[r] * in[c];
      gb[r] += delta[r];
    }
    if (l > 0 || dinput != nullptr) {
      const double* W = params_.data() + weight_offset(l);
      Vec prev(in_w, 0.0);
      for (int r = 0; r < out_w; ++r) {
        const double* row = W + static_cast<std::size_t>(r) * in_w;
        for (int c = 0; c < in_w; ++c) prev[c] += row[c] * delta[r];
      }
      delta = std::move(prev);
    }
  }
  if (dinput != nullptr) *dinput = std::move(delta);
}

bool Mlp::finite() const {
  return std::all_of(params_.begin(), params_.end(),
                     [](double p) { return std::isfinite(p); });
}

OptimizerState OptimizerState::sgd(double lr) {
  OptimizerState s;
  s.kind = OptKind::Sgd;
  s.lr = lr;
  return s;
}

OptimizerState OptimizerState::adam(double lr) {
  OptimizerState s;
  s.kind = OptKind::Adam;
  s.lr = lr;
  return s;
}

void OptimizerState::step(Vec& params, std::span<const double> grad) {
  if (grad.size() != params.size())
    throw DimensionMismatch("optimizer step: shape mismatch");
  if (lr <= 0.0) throw InvalidArgument("optimizer lr must be positive");
  if (kind == OptKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    return;
  }
  if (m.empty()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }
  if (m.size() != params.size())
    throw DimensionMismatch("optimizer step: moment shape mismatch");
  ++step_count;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + adam_eps);
  }
}

void softmax_inplace(Vec& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - mx);
    sum += z;
  }
  for (double& z : logits) z /= sum;
}

double ce_from_probs(const Vec& probs, int label) {
  if (label < 0 || label >= static_cast<int>(probs.size()))
    throw InvalidArgument("ce_from_probs: label out of range");
  return -std::log(std::max(probs[label], kProbFloor));
}

void check_finite(double loss, const std::string& where) {
  if (!std::isfinite(loss))
    throw DivergenceError("non-finite loss in " + where);
}

void batch_forward(const Mlp& model, std::span<const Vec> xs,
                   std::vector<Vec>& out, Exec exec) {
  out.resize(xs.size());
#ifdef _OPENMP
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(xs.size()); ++i)
      out[i] = model.forward(xs[i]);
    return;
  }
#endif
  (void)exec;
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = model.forward(xs[i]);
}

LossGrad ce_loss_grad(const Mlp& model, std::span<const Vec> xs,
                      std::span<const int> labels, Exec exec) {
  if (xs.empty()) throw EmptyDataset("ce_loss_grad: empty batch");
  if (xs.size() != labels.size())
    throw DimensionMismatch("ce_loss_grad: label count mismatch");
  LossGrad out;
  out.grad.assign(model.num_params(), 0.0);
  Vec* sinks[] = {&out.grad};
  const double total = batch_reduce(
      xs.size(), exec, std::span<Vec* const>(sinks, 1),
      [&](std::size_t i, std::span<Vec* const> g) {
        Mlp::Cache cache;
        model.forward_cached(xs[i], cache);
        Vec probs = cache.output();
        if (!model.spec().softmax_output) softmax_inplace(probs);
        const double loss = ce_from_probs(probs, labels[i]);
        Vec delta;
        if (model.spec().softmax_output) {
          // dL/dp = -e_y / p_y; the softmax Jacobian inside backward()
          // reduces this to the usual p - e_y on the logits.
          delta.assign(probs.size(), 0.0);
          delta[labels[i]] = -1.0 / std::max(probs[labels[i]], kProbFloor);
        } else {
          delta = std::move(probs);
          delta[labels[i]] -= 1.0;
        }
        model.backward(cache, std::move(delta), *g[0]);
        return loss;
      });
  const double inv = 1.0 / static_cast<double>(xs.size());
  out.loss = total * inv;
  for (double& gv : out.grad) gv *= inv;
  check_finite(out.loss, "ce_loss_grad");
  return out;
}

namespace {

Vec ce_prob_delta_local(const Vec& probs, int label) {
  Vec delta(probs.size(), 0.0);
  delta[label] = -1.0 / std::max(probs[label], kProbFloor);
  return delta;
}

}  // namespace

double chain_ce_loss_grad(const Mlp& encoder, const Mlp& head,
                          std::span<const Vec> xs, std::span<const int> ys,
                          Vec* genc, Vec* ghead, Exec exec) {
  if (xs.empty()) throw EmptyDataset("chain_ce_loss_grad: empty batch");
  if (xs.size() != ys.size())
    throw DimensionMismatch("chain_ce_loss_grad: label count mismatch");
  if (!head.spec().softmax_output)
    throw InvalidArgument("chain_ce_loss_grad: head must emit probabilities");
  Vec dummy;
  Vec* sinks[2] = {genc ? genc : &dummy, ghead ? ghead : &dummy};
  const bool want_enc = genc != nullptr;
  const bool want_head = ghead != nullptr;
  const double total = batch_reduce(
      xs.size(), exec, std::span<Vec* const>(sinks, 2),
      [&](std::size_t i, std::span<Vec* const> g) {
        Mlp::Cache ec, hc;
        encoder.forward_cached(xs[i], ec);
        head.forward_cached(ec.output(), hc);
        const Vec& probs = hc.output();
        const double loss = ce_from_probs(probs, ys[i]);
        if (want_enc || want_head) {
          Vec hgrad_local;
          Vec* hsink = want_head ? g[1] : &hgrad_local;
          if (!want_head) hgrad_local.assign(head.num_params(), 0.0);
          Vec dr;
          head.backward(hc, ce_prob_delta_local(probs, ys[i]), *hsink,
                        want_enc ? &dr : nullptr);
          if (want_enc) encoder.backward(ec, std::move(dr), *g[0]);
        }
        return loss;
      });
  const double inv = 1.0 / static_cast<double>(xs.size());
  if (genc)
    for (double& v : *genc) v *= inv;
  if (ghead)
    for (double& v : *ghead) v *= inv;
  check_finite(total, "chain_ce_loss_grad");
  return total * inv;
}

LossGrad mse_loss_grad(const Mlp& model, std::span<const Vec> xs,
                       std::span<const Vec> targets, Exec exec) {
  if (xs.empty()) throw EmptyDataset("mse_loss_grad: empty batch");
  if (xs.size() != targets.size())
    throw DimensionMismatch("mse_loss_grad: target count mismatch");
  LossGrad out;
  out.grad.assign(model.num_params(), 0.0);
  Vec* sinks[] = {&out.grad};
  const double d = static_cast<double>(model.output_dim());
  const double total = batch_reduce(
      xs.size(), exec, std::span<Vec* const>(sinks, 1),
      [&](std::size_t i, std::span<Vec* const> g) {
        if (targets[i].size() != static_cast<std::size_t>(model.output_dim()))
          throw DimensionMismatch("mse_loss_grad: target dimension mismatch");
        Mlp::Cache cache;
        model.forward_cached(xs[i], cache);
        const Vec& y = cache.output();
        double loss = 0.0;
        Vec delta(y.size());
        for (std::size_t j = 0; j < y.size(); ++j) {
          const double diff = y[j] - targets[i][j];
          loss += diff * diff;
          delta[j] = 2.0 * diff / d;
        }
        model.backward(cache, std::move(delta), *g[0]);
        return loss / d;
      });
  const double inv = 1.0 / static_cast<double>(xs.size());
  out.loss = total * inv;
  for (double& gv : out.grad) gv *= inv;
  check_finite(out.loss, "mse_loss_grad");
  return out;
}

}  // namespace privrep
