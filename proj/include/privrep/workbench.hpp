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

#ifndef PRIVREP_WORKBENCH_HPP_
#define PRIVREP_WORKBENCH_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "privrep/attacks.hpp"
#include "privrep/bounds.hpp"
#include "privrep/core.hpp"
#include "privrep/data.hpp"
#include "privrep/defense_dra.hpp"
#include "privrep/defense_mia.hpp"
#include "privrep/defense_pia.hpp"
#include "privrep/dp.hpp"

namespace privrep {

enum class DefenseKind { Mia, Pia, Dra, Advreg, DpSgd, DpEncoder, None };

std::string to_string(DefenseKind kind);
DefenseKind defense_kind_from_string(const std::string& s);

// One experiment family: defense kind, game/dp knobs, data source and the
// sweep lists. Parsed from a flat key-value file with dotted section keys.
struct ExperimentConfig {
  DefenseKind kind = DefenseKind::Mia;
  GameConfig game;
  DpConfig dp;
  SynthSpec data;
  std::string csv_path;  // when set, replaces the synthetic source
  std::string csv_label = "y";
  std::string csv_attribute;
  double attack_frac = 0.8;
  int rep_dim = 16;
  int hidden = 32;
  AttackTrainConfig attack;
  int n_shadow = 16;
  bool run_lira = false;
  bool run_bounds = true;
  AggregatorMode aggregator = AggregatorMode::Mean;
  bool substitute_ablation = true;
  PerturbFamily family = PerturbFamily::GaussianTanh;
  double recon_eta = 0.5;
  std::vector<double> sweep_lambda;
  std::vector<double> sweep_epsilon;
  std::vector<double> sweep_sigma;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  int workers = 1;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_kv(
      const std::map<std::string, std::string>& kv);

  // PRIVREP_OUT_DIR and PRIVREP_THREADS only.
  void apply_env_overrides();
  void validate() const;

  // sweep points for this defense kind (lambda, epsilon or sigma)
  std::vector<double> sweep_points() const;
  std::string sweep_key() const;
};

struct BoundReport {
  double plug_in_bits = 0.0;
  double ce_upper_bits = 0.0;
  double leakage_bound_plug_in = 1.0;
  double leakage_bound_ce = 1.0;
  double advantage = 0.0;
  double delta_cond = 0.0;
  double delta_marg = 0.0;
  double r_bound = 0.0;
  double lipschitz = 0.0;
  double tradeoff_lower = 0.0;
  double dra_error_lower = -1.0;  // <0 when not applicable
  std::string note = "estimates only; not certified";
};

// Self-describing result of one (defense, sweep point, seed) run.
struct ResultsRecord {
  std::string version = "privrep-record-1";
  std::string defense;
  std::string sweep_key;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::vector<std::array<double, 3>> round_losses;
  double utility = -1.0;
  std::optional<AttackReport> attack;
  std::optional<AttackReport> lira;
  std::optional<AttackReport> substitute_attack;
  std::optional<ReconReport> recon;
  std::optional<BoundReport> bounds;
  double wall_clock_s = 0.0;
  std::string error_stage;  // empty on success

  std::string to_json_string() const;
  static ResultsRecord from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static ResultsRecord load(const std::string& path);
};

// Frozen networks plus whatever the attack harness is granted: the
// perturbation distribution, the aggregator mode and the ratio grid.
struct Checkpoint {
  std::string kind;
  std::vector<std::pair<std::string, Mlp>> networks;
  std::optional<PerturbationParams> perturbation;
  std::optional<AggregatorMode> aggregator;
  std::vector<double> ratio_grid;

  const Mlp& net(const std::string& name) const;
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

// Full protocol for one sweep point: train the defense, freeze the
// encoder, train the attacker(s), evaluate utility and attack metrics,
// compute bounds. Stage failures land in error_stage with partial results.
ResultsRecord run_single(const ExperimentConfig& config, double sweep_value,
                         std::uint64_t seed, Checkpoint* checkpoint_out = nullptr);

// Every (sweep point x seed) job; records and checkpoints are persisted
// under config.out_dir.
std::vector<ResultsRecord> run(const ExperimentConfig& config);

// One CSV row per sample: representation coordinates, task label, private
// attribute. A reconstruction checkpoint adds one seeded perturbation draw
// per sample.
void export_representations(const Checkpoint& checkpoint, const Dataset& data,
                            const std::string& csv_path, std::uint64_t seed);

// Summary tables (CSV + Markdown) and per-record ROC point files.
void write_report(const std::vector<ResultsRecord>& records,
                  const std::string& out_dir);

}  // namespace privrep

#endif  // PRIVREP_WORKBENCH_HPP_
