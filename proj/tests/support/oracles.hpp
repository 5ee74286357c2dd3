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

// Test-only oracles, independent of the implementation paths they check.

#ifndef PRIVREP_TESTS_ORACLES_HPP_
#define PRIVREP_TESTS_ORACLES_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "privrep/common.hpp"

namespace privrep::oracles {

// Central finite differences of eval() w.r.t. params (common random
// numbers are the caller's responsibility: eval must be deterministic).
inline Vec finite_difference(const std::function<double()>& eval, Vec& params,
                             double h = 1e-5) {
  Vec grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = eval();
    params[i] = keep - h;
    const double down = eval();
    params[i] = keep;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline bool grads_match(const Vec& analytic, const Vec& numeric, double rtol,
                        double atol = 1e-6) {
  if (analytic.size() != numeric.size()) return false;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - numeric[i]);
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
    if (diff > atol + rtol * scale) return false;
  }
  return true;
}

// Hand-rolled forward pass for a 2-layer tanh network with explicit
// weight matrices; written without touching the library's layout helpers.
inline Vec two_layer_tanh_forward(const std::vector<Vec>& w1, const Vec& b1,
                                  const std::vector<Vec>& w2, const Vec& b2,
                                  const Vec& x, bool tanh_output) {
  Vec h(w1.size());
  for (std::size_t r = 0; r < w1.size(); ++r) {
    double z = b1[r];
    for (std::size_t c = 0; c < x.size(); ++c) z += w1[r][c] * x[c];
    h[r] = std::tanh(z);
  }
  Vec y(w2.size());
  for (std::size_t r = 0; r < w2.size(); ++r) {
    double z = b2[r];
    for (std::size_t c = 0; c < h.size(); ++c) z += w2[r][c] * h[c];
    y[r] = tanh_output ? std::tanh(z) : z;
  }
  return y;
}

// Largest singular value via the eigendecomposition of A^T A with the
// cyclic Jacobi method (dense, exhaustive).
inline double spectral_norm_jacobi(const std::vector<Vec>& a) {
  const std::size_t rows = a.size();
  const std::size_t cols = a.front().size();
  std::vector<Vec> m(cols, Vec(cols, 0.0));
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t r = 0; r < rows; ++r) m[i][j] += a[r][i] * a[r][j];
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < cols; ++p)
      for (std::size_t q = p + 1; q < cols; ++q) off += m[p][q] * m[p][q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        if (std::abs(m[p][q]) < 1e-18) continue;
        const double theta = 0.5 * std::atan2(2.0 * m[p][q], m[q][q] - m[p][p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t k = 0; k < cols; ++k) {
          const double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = c * mkp - s * mkq;
          m[k][q] = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < cols; ++k) {
          const double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = c * mpk - s * mqk;
          m[q][k] = s * mpk + c * mqk;
        }
      }
    }
  }
  double mx = 0.0;
  for (std::size_t i = 0; i < cols; ++i) mx = std::max(mx, m[i][i]);
  return std::sqrt(std::max(0.0, mx));
}

}  // namespace privrep::oracles

#endif  // PRIVREP_TESTS_ORACLES_HPP_
