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

#include "privrep/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "privrep/rng.hpp"

namespace privrep {

namespace {

// Unit vector along a seeded random direction.
Vec random_direction(int dim, Rng& rng) {
  Vec v(dim);
  double norm = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

// Gram-Schmidt step: b minus its projection on a (a unit).
Vec orthogonalize(const Vec& a, Vec b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  double norm = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] -= dot * a[i];
    norm += b[i] * b[i];
  }
  norm = std::sqrt(norm);
  for (double& x : b) x /= norm;
  return b;
}

LabeledSample draw_mixture_sample(const Vec& class_dir, double separation,
                                  int num_classes, double label_noise,
                                  Rng& rng) {
  LabeledSample s;
  const int y = static_cast<int>(rng.uniform_index(num_classes));
  const int dim = static_cast<int>(class_dir.size());
  s.features.resize(dim);
  // classes sit at evenly spaced offsets along class_dir
  const double offset =
      separation * (static_cast<double>(y) - (num_classes - 1) / 2.0);
  for (int i = 0; i < dim; ++i)
    s.features[i] = offset * class_dir[i] + rng.normal();
  s.label = y;
  if (label_noise > 0.0 && rng.uniform() < label_noise)
    s.label = static_cast<int>((s.label + 1 + rng.uniform_index(num_classes - 1)) %
                               num_classes);
  return s;
}

}  // namespace

MiaSynthTask synth_mia_task(const SynthSpec& spec) {
  if (spec.dim <= 0 || spec.num_classes < 2)
    throw InvalidArgument("synth_mia_task: invalid spec");
  Rng root(spec.seed);
  Rng dir_rng = root.substream("directions");
  Rng sample_rng = root.substream("samples");
  const Vec dir = random_direction(spec.dim, dir_rng);

  MiaSynthTask task;
  task.num_classes = spec.num_classes;
  auto draw_n = [&](int n, std::vector<LabeledSample>& out) {
    out.reserve(n);
    for (int i = 0; i < n; ++i)
      out.push_back(draw_mixture_sample(dir, spec.separation, spec.num_classes,
                                        spec.label_noise, sample_rng));
  };
  draw_n(spec.n_members, task.members);
  draw_n(spec.n_nonmembers, task.nonmembers);
  draw_n(spec.n_utility_test, task.utility_test);
  return task;
}

namespace {

Dataset draw_attribute_pool(const SynthSpec& spec, const Vec& class_dir,
                            const Vec& attr_dir, int n, Rng& rng) {
  Dataset pool;
  pool.num_classes = spec.num_classes;
  pool.samples.reserve(n);
  pool.attributes.reserve(n);
  for (int i = 0; i < n; ++i) {
    LabeledSample s = draw_mixture_sample(class_dir, spec.separation,
                                          spec.num_classes, spec.label_noise,
                                          rng);
    const int attr = rng.uniform() < 0.5 ? 1 : 0;
    if (attr)
      for (std::size_t j = 0; j < s.features.size(); ++j)
        s.features[j] += spec.attr_shift * attr_dir[j];
    pool.samples.push_back(std::move(s));
    pool.attributes.push_back(attr);
  }
  return pool;
}

}  // namespace

PiaSynthTask synth_pia_bags(const SynthSpec& spec) {
  if (spec.ratio_grid.empty())
    throw InvalidArgument("synth_pia_bags: empty ratio grid");
  Rng root(spec.seed);
  Rng dir_rng = root.substream("directions");
  Rng train_rng = root.substream("train-pool");
  Rng test_rng = root.substream("test-pool");
  const Vec class_dir = random_direction(spec.dim, dir_rng);
  const Vec attr_dir = orthogonalize(class_dir, random_direction(spec.dim, dir_rng));

  PiaSynthTask task;
  task.train_pool =
      draw_attribute_pool(spec, class_dir, attr_dir, spec.n_reference, train_rng);
  task.test_pool =
      draw_attribute_pool(spec, class_dir, attr_dir, spec.n_reference, test_rng);
  task.train_bags = sample_bags(task.train_pool.samples,
                                task.train_pool.attributes, spec.ratio_grid,
                                spec.bag_size_range, spec.n_train_bags,
                                Rng::mix(spec.seed, "train-bags"));
  task.test_bags = sample_bags(task.test_pool.samples,
                               task.test_pool.attributes, spec.ratio_grid,
                               spec.bag_size_range, spec.n_test_bags,
                               Rng::mix(spec.seed, "test-bags"));
  return task;
}

DraSynthTask synth_dra_task(const SynthSpec& spec) {
  Rng root(spec.seed);
  Rng dir_rng = root.substream("directions");
  Rng sample_rng = root.substream("samples");
  const Vec dir = random_direction(spec.dim, dir_rng);

  int grid = 0;
  if (spec.grid_shaped) {
    grid = static_cast<int>(std::lround(std::sqrt(double(spec.dim))));
    if (grid * grid != spec.dim)
      throw InvalidArgument("synth_dra_task: grid_shaped requires a square dim");
  }

  auto draw_set = [&](int n) {
    Dataset out;
    out.num_classes = spec.num_classes;
    out.grid_h = grid;
    out.grid_w = grid;
    out.samples.reserve(n);
    for (int i = 0; i < n; ++i) {
      LabeledSample s = draw_mixture_sample(dir, spec.separation,
                                            spec.num_classes, spec.label_noise,
                                            sample_rng);
      // squash into [0,1] so image-style metrics apply
      for (double& v : s.features)
        v = std::clamp(0.5 + 0.22 * v, 0.0, 1.0);
      out.samples.push_back(std::move(s));
    }
    return out;
  };
  DraSynthTask task;
  task.train = draw_set(spec.n_members);
  task.utility_test = draw_set(spec.n_utility_test);
  task.attack_test = draw_set(spec.n_nonmembers);
  return task;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& cell, std::size_t row) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw Error("load_csv: non-numeric cell '" + cell + "' at row " +
                std::to_string(row));
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::optional<std::string>& attribute_column) {
  std::ifstream in(path);
  if (!in) throw Error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw EmptyDataset("load_csv: empty file");
  const auto header = split_csv_line(line);

  long label_idx = -1, attr_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column) label_idx = static_cast<long>(i);
    if (attribute_column && header[i] == *attribute_column)
      attr_idx = static_cast<long>(i);
  }
  if (label_idx < 0)
    throw MissingColumn("load_csv: missing label column '" + label_column + "'");
  if (attribute_column && attr_idx < 0)
    throw MissingColumn("load_csv: missing attribute column '" +
                        *attribute_column + "'");

  Dataset data;
  int max_label = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw Error("load_csv: ragged row " + std::to_string(row));
    LabeledSample s;
    int attr = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double v = parse_number(cells[i], row);
      if (static_cast<long>(i) == label_idx)
        s.label = static_cast<int>(std::lround(v));
      else if (static_cast<long>(i) == attr_idx)
        attr = static_cast<int>(std::lround(v));
      else
        s.features.push_back(v);
    }
    max_label = std::max(max_label, s.label);
    data.samples.push_back(std::move(s));
    if (attr_idx >= 0) data.attributes.push_back(attr);
  }
  if (data.samples.empty()) throw EmptyDataset("load_csv: no data rows");
  data.num_classes = max_label + 1;
  validate_dataset(data.samples, data.attributes);
  return data;
}

void save_csv(const Dataset& data, const std::string& path,
              const std::string& label_column,
              const std::optional<std::string>& attribute_column) {
  if (data.samples.empty()) throw EmptyDataset("save_csv: no samples");
  std::ofstream out(path);
  if (!out) throw Error("save_csv: cannot open " + path);
  const std::size_t d = data.samples.front().features.size();
  for (std::size_t i = 0; i < d; ++i) out << "x" << i << ",";
  out << label_column;
  if (attribute_column) out << "," << *attribute_column;
  out << "\n";
  char buf[64];
  for (std::size_t r = 0; r < data.samples.size(); ++r) {
    const auto& s = data.samples[r];
    for (double v : s.features) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ",";
    }
    out << s.label;
    if (attribute_column)
      out << "," << (r < data.attributes.size() ? data.attributes[r] : 0);
    out << "\n";
  }
}

}  // namespace privrep
