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

#ifndef PRIVREP_NN_HPP_
#define PRIVREP_NN_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "privrep/common.hpp"
#include "privrep/rng.hpp"

namespace privrep {

enum class Activation { Tanh, Relu };

// Architecture descriptor; serialized into checkpoints.
// Probabilistic heads set softmax_output so forward() emits a probability
// vector; backward() then routes through the softmax Jacobian.
struct MlpSpec {
  std::vector<int> widths;  // [input, hidden..., output]
  Activation activation = Activation::Tanh;
  bool activate_output = false;
  bool softmax_output = false;
};

// Fully connected network over a flat parameter array. Layer l stores a
// row-major (widths[l+1] x widths[l]) weight block followed by the bias.
// Forward on a frozen model is thread-safe; mutation belongs to a single
// training loop.
class Mlp {
 public:
  explicit Mlp(MlpSpec spec);

  // Fan-in scaled uniform init: He-style for relu, Xavier-style for tanh.
  static Mlp initialized(MlpSpec spec, Rng& rng);

  int input_dim() const { return spec_.widths.front(); }
  int output_dim() const { return spec_.widths.back(); }
  std::size_t num_params() const { return params_.size(); }
  int num_layers() const { return static_cast<int>(spec_.widths.size()) - 1; }
  const MlpSpec& spec() const { return spec_; }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(spec_.widths[layer]) *
                                 spec_.widths[layer + 1];
  }

  Vec forward(std::span<const double> x) const;

  // Per-layer activations kept for reverse mode; acts[0] is the input.
  struct Cache {
    std::vector<Vec> acts;
    const Vec& output() const { return acts.back(); }
  };

  void forward_cached(std::span<const double> x, Cache& cache) const;

  // Accumulates d(loss)/d(params) into grad given d(loss)/d(output);
  // optionally produces d(loss)/d(input) for chaining into an upstream
  // network.
  void backward(const Cache& cache, Vec dout, Vec& grad,
                Vec* dinput = nullptr) const;

  bool finite() const;

 private:
  MlpSpec spec_;
  Vec params_;
  std::vector<std::size_t> offsets_;
};

enum class OptKind { Sgd, Adam };

struct OptimizerState {
  OptKind kind = OptKind::Sgd;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  Vec m, v;
  long step_count = 0;

  static OptimizerState sgd(double lr);
  static OptimizerState adam(double lr);

  // One descent step: SGD p -= lr*g, Adam bias-corrected.
  void step(Vec& params, std::span<const double> grad);
};

// Numerically stabilized softmax (max subtraction).
void softmax_inplace(Vec& logits);

// Cross entropy -ln p[label] with the probability floor.
double ce_from_probs(const Vec& probs, int label);

inline double softplus(double z) {
  // Overflow-safe: sp(z) = ln(1+e^z).
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                  : std::exp(z) / (1.0 + std::exp(z));
}

// Deterministic batch reduction: runs body(i, grads) for i in [0, n) and
// accumulates per-sample gradient contributions plus the summed loss.
// The parallel path gives each thread a private copy of every gradient
// buffer (static schedule) and reduces them in thread order, so results
// are reproducible for a fixed thread count. The serial path is the
// reference implementation used by the parity tests and the benchmark.
template <class Body>
double batch_reduce(std::size_t n, Exec exec, std::span<Vec* const> grads,
                    Body&& body) {
#ifdef _OPENMP
  if (exec == Exec::Parallel && n > 1 && omp_get_max_threads() > 1) {
    const int nt = omp_get_max_threads();
    std::vector<std::vector<Vec>> locals(nt);
    std::vector<double> losses(nt, 0.0);
#pragma omp parallel num_threads(nt)
    {
      const int t = omp_get_thread_num();
      auto& mine = locals[t];
      mine.resize(grads.size());
      for (std::size_t k = 0; k < grads.size(); ++k)
        mine[k].assign(grads[k]->size(), 0.0);
      std::vector<Vec*> ptrs(grads.size());
      for (std::size_t k = 0; k < grads.size(); ++k) ptrs[k] = &mine[k];
      double local_loss = 0.0;
#pragma omp for schedule(static)
      for (long i = 0; i < static_cast<long>(n); ++i)
        local_loss += body(static_cast<std::size_t>(i),
                           std::span<Vec* const>(ptrs));
      losses[t] = local_loss;
    }
    double total = 0.0;
    for (int t = 0; t < nt; ++t) {
      total += losses[t];
      if (locals[t].empty()) continue;
      for (std::size_t k = 0; k < grads.size(); ++k) {
        auto& dst = *grads[k];
        const auto& src = locals[t][k];
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
      }
    }
    return total;
  }
#endif
  (void)exec;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += body(i, grads);
  return total;
}

// Parallel forward over a batch; out[i] = model(xs[i]).
void batch_forward(const Mlp& model, std::span<const Vec> xs,
                   std::vector<Vec>& out, Exec exec = Exec::Parallel);

struct LossGrad {
  double loss = 0.0;  // mean over the batch
  Vec grad;           // d(mean loss)/d(params)
};

// Mean softmax cross entropy of model(x) against integer labels.
LossGrad ce_loss_grad(const Mlp& model, std::span<const Vec> xs,
                      std::span<const int> labels, Exec exec = Exec::Parallel);

// Mean cross entropy of head(encoder(x)) with the gradient accumulated
// into whichever of genc/ghead is non-null (scaled to the mean). This is
// the chain every alternating trainer steps on.
double chain_ce_loss_grad(const Mlp& encoder, const Mlp& head,
                          std::span<const Vec> xs, std::span<const int> ys,
                          Vec* genc, Vec* ghead, Exec exec = Exec::Parallel);

// Mean per-sample MSE (averaged over output coordinates) against targets.
LossGrad mse_loss_grad(const Mlp& model, std::span<const Vec> xs,
                       std::span<const Vec> targets,
                       Exec exec = Exec::Parallel);

void check_finite(double loss, const std::string& where);

}  // namespace privrep

#endif  // PRIVREP_NN_HPP_
