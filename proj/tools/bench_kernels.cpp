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

// Compares the serial reference batch kernels against the OpenMP path.

#include <chrono>
#include <cstdio>
#include <functional>
#include <tuple>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "privrep/nn.hpp"
#include "privrep/rng.hpp"

using namespace privrep;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; parallel path falls back to serial\n");
#endif
  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial ms", "openmp ms",
              "speedup");

  Rng rng(7);
  for (const auto& [batch, dim, hidden] :
       {std::tuple{256, 32, 64}, std::tuple{1024, 64, 128},
        std::tuple{4096, 64, 256}}) {
    MlpSpec spec{{dim, hidden, hidden, 10}, Activation::Tanh, false, true};
    Rng init = rng.substream("init");
    const Mlp model = Mlp::initialized(spec, init);
    std::vector<Vec> xs(batch, Vec(dim));
    std::vector<int> ys(batch);
    for (int i = 0; i < batch; ++i) {
      for (double& v : xs[i]) v = rng.normal();
      ys[i] = static_cast<int>(rng.uniform_index(10));
    }

    const int reps = batch <= 1024 ? 20 : 5;
    const double ts = time_ms(
        [&] { (void)ce_loss_grad(model, xs, ys, Exec::Serial); }, reps);
    const double tp = time_ms(
        [&] { (void)ce_loss_grad(model, xs, ys, Exec::Parallel); }, reps);
    char name[64];
    std::snprintf(name, sizeof name, "ce_grad n=%d d=%d h=%d", batch, dim,
                  hidden);
    std::printf("%-28s %10.2f %10.2f %7.2fx\n", name, ts, tp, ts / tp);

    std::vector<Vec> out;
    const double fs = time_ms(
        [&] { batch_forward(model, xs, out, Exec::Serial); }, reps);
    const double fp = time_ms(
        [&] { batch_forward(model, xs, out, Exec::Parallel); }, reps);
    std::snprintf(name, sizeof name, "forward n=%d d=%d h=%d", batch, dim,
                  hidden);
    std::printf("%-28s %10.2f %10.2f %7.2fx\n", name, fs, fp, fs / fp);
  }
  return 0;
}
