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

#include "privrep/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace privrep {

namespace {

constexpr double kLog2 = 0.6931471805599453;
constexpr double kPi = 3.14159265358979323846;

double h2(double x) {  // binary entropy in bits
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

}  // namespace

double inv_binary_entropy_lower(double p) {
  if (p <= 0.0 || p > 1.0)
    throw InvalidArgument("inv_binary_entropy_lower: p must lie in (0,1]");
  return p / (2.0 * std::log2(6.0 / p));
}

double inv_binary_entropy_exact(double p) {
  if (p < 0.0 || p > 1.0)
    throw InvalidArgument("inv_binary_entropy_exact: p must lie in [0,1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 0.5;
  double lo = 0.0, hi = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h2(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double mia_leakage_bound(double h_cond_bits) {
  if (h_cond_bits < 0.0)
    throw InvalidArgument("mia_leakage_bound: negative conditional entropy");
  if (h_cond_bits == 0.0) return 1.0;  // vacuous
  return 1.0 - h_cond_bits / (2.0 * std::log2(6.0 / h_cond_bits));
}

CondEntropyEstimates conditional_entropy_from_reps(const Mlp& adversary_head,
                                                   std::span<const Vec> reps,
                                                   std::span<const int> u) {
  if (reps.empty()) throw EmptyDataset("conditional_entropy_from_reps: empty set");
  if (reps.size() != u.size())
    throw DimensionMismatch("conditional_entropy_from_reps: label mismatch");
  CondEntropyEstimates est;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    Vec q = adversary_head.forward(reps[i]);
    if (!adversary_head.spec().softmax_output) softmax_inplace(q);
    double hq = 0.0;
    for (double p : q) {
      const double pf = std::max(p, kProbFloor);
      hq -= pf * std::log2(pf);
    }
    est.plug_in_bits += hq;
    est.ce_upper_bits -= std::log2(std::max(q[u[i]], kProbFloor));
  }
  est.plug_in_bits /= static_cast<double>(reps.size());
  est.ce_upper_bits /= static_cast<double>(reps.size());
  return est;
}

CondEntropyEstimates conditional_entropy_estimates(
    const Mlp& encoder, const Mlp& adversary_head,
    std::span<const LabeledSample> eval, std::span<const int> u) {
  if (eval.empty()) throw EmptyDataset("conditional_entropy_estimates: empty set");
  std::vector<Vec> reps;
  reps.reserve(eval.size());
  for (const auto& s : eval) reps.push_back(encoder.forward(s.features));
  return conditional_entropy_from_reps(adversary_head, reps, u);
}

GeometrySpec GeometrySpec::unit_hypercube(int dim, double eta) {
  if (dim < 1) throw InvalidArgument("unit_hypercube: dim must be >= 1");
  if (eta <= 0.0) throw InvalidArgument("unit_hypercube: eta must be positive");
  GeometrySpec g;
  g.dim = dim;
  g.vol_boundary_x = 2.0 * dim;  // (d-1)-measure of the unit cube boundary
  // sphere surface 2 pi^{d/2} eta^{d-1} / Gamma(d/2): an upper envelope of
  // the eta-ball boundary intersected with the cube
  g.vol_boundary_eta = 2.0 *
                       std::exp(0.5 * dim * std::log(kPi) -
                                std::lgamma(0.5 * dim)) *
                       std::pow(eta, dim - 1);
  return g;
}

double dra_error_bound(double mi_nats, const GeometrySpec& geom) {
  if (geom.vol_boundary_x <= 0.0 || geom.vol_boundary_eta <= 0.0 ||
      geom.vol_boundary_eta >= geom.vol_boundary_x)
    throw InvalidGeometry("dra_error_bound: need Vol(dX) > Vol(dX(eta)) > 0");
  const double denom =
      std::log(geom.vol_boundary_x) - std::log(geom.vol_boundary_eta);
  const double v = 1.0 - (mi_nats + kLog2) / denom;
  return std::clamp(v, 0.0, 1.0);
}

double tradeoff_bound(const TradeoffInputs& in, TradeoffVariant) {
  if (in.delta < 0.0 || in.delta > 1.0)
    throw InvalidArgument("tradeoff_bound: delta must lie in [0,1]");
  if (in.r_bound < 0.0 || in.lipschitz < 0.0)
    throw InvalidArgument("tradeoff_bound: negative geometry inputs");
  if (in.advantage < 0.0 || in.advantage > 1.0)
    throw InvalidArgument("tradeoff_bound: advantage must lie in [0,1]");
  return std::max(0.0, in.delta - 2.0 * in.r_bound * in.lipschitz * in.advantage);
}

double empirical_advantage(std::span<const int> decisions,
                           std::span<const int> u) {
  if (decisions.size() != u.size() || decisions.empty())
    throw DimensionMismatch("empirical_advantage: size mismatch");
  std::size_t n1 = 0, n0 = 0, a1 = 0, a0 = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i]) {
      ++n1;
      if (decisions[i]) ++a1;  // TPR numerator
    } else {
      ++n0;
      if (decisions[i]) ++a0;  // FPR numerator
    }
  }
  if (n0 == 0 || n1 == 0)
    throw InvalidArgument("empirical_advantage: single-class labels");
  const double tpr = static_cast<double>(a1) / n1;
  const double fpr = static_cast<double>(a0) / n0;
  return std::abs(tpr - fpr);
}

double empirical_advantage_dra(std::span<const int> success,
                               std::span<const int> y) {
  if (success.size() != y.size() || success.empty())
    throw DimensionMismatch("empirical_advantage_dra: size mismatch");
  std::size_t n1 = 0, n0 = 0, s1 = 0, s0 = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) {
      ++n1;
      s1 += success[i] ? 1 : 0;
    } else {
      ++n0;
      s0 += success[i] ? 1 : 0;
    }
  }
  if (n0 == 0 || n1 == 0)
    throw InvalidArgument("empirical_advantage_dra: single-class labels");
  return std::abs(static_cast<double>(s1) / n1 - static_cast<double>(s0) / n0);
}

std::pair<double, double> delta_constants(std::span<const int> y,
                                          std::span<const int> u) {
  if (y.size() != u.size() || y.empty())
    throw DimensionMismatch("delta_constants: size mismatch");
  for (int v : y)
    if (v != 0 && v != 1)
      throw InvalidArgument("delta_constants: task labels must be binary");
  std::size_t n1 = 0, n0 = 0, y1_u1 = 0, y1_u0 = 0, y1 = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) ++y1;
    if (u[i]) {
      ++n1;
      if (y[i]) ++y1_u1;
    } else {
      ++n0;
      if (y[i]) ++y1_u0;
    }
  }
  if (n0 == 0 || n1 == 0)
    throw InvalidArgument("delta_constants: both attribute values required");
  const double p1 = static_cast<double>(y1_u1) / n1;
  const double p0 = static_cast<double>(y1_u0) / n0;
  const double py = static_cast<double>(y1) / y.size();
  return {std::abs(p0 - p1), std::abs(py - (1.0 - py))};
}

double lipschitz_upper(const Mlp& model) {
  double product = 1.0;
  const auto& widths = model.spec().widths;
  for (int l = 0; l < model.num_layers(); ++l) {
    const int rows = widths[l + 1];
    const int cols = widths[l];
    const double* W = model.params().data() + model.weight_offset(l);
    // power iteration on W^T W
    Vec v(cols, 1.0 / std::sqrt(static_cast<double>(cols)));
    Vec wv(rows), wtwv(cols);
    double sigma = 0.0;
    for (int it = 0; it < 100; ++it) {
      for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        const double* row = W + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) s += row[c] * v[c];
        wv[r] = s;
      }
      std::fill(wtwv.begin(), wtwv.end(), 0.0);
      for (int r = 0; r < rows; ++r) {
        const double* row = W + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) wtwv[c] += row[c] * wv[r];
      }
      double norm = 0.0;
      for (double x : wtwv) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) {
        sigma = 0.0;
        break;
      }
      for (int c = 0; c < cols; ++c) v[c] = wtwv[c] / norm;
      double wvn = 0.0;
      for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        const double* row = W + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) s += row[c] * v[c];
        wv[r] = s;
        wvn += s * s;
      }
      sigma = std::sqrt(wvn);
    }
    product *= sigma;
  }
  return product;
}

}  // namespace privrep
