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

#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "privrep/workbench.hpp"

namespace {

using namespace privrep;

void apply_thread_env() {
#ifdef _OPENMP
  if (const char* t = std::getenv("PRIVREP_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

ExperimentConfig load_config(const std::string& path, long long seed) {
  ExperimentConfig cfg = ExperimentConfig::from_file(path);
  if (seed >= 0) {
    cfg.seeds = {static_cast<std::uint64_t>(seed)};
    cfg.game.seed = static_cast<std::uint64_t>(seed);
  }
  return cfg;
}

Dataset dataset_for_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.csv_path.empty())
    return load_csv(cfg.csv_path, cfg.csv_label,
                    cfg.csv_attribute.empty()
                        ? std::nullopt
                        : std::optional(cfg.csv_attribute));
  SynthSpec spec = cfg.data;
  spec.seed = Rng::mix(seed, "data");
  if (cfg.kind == DefenseKind::Dra) {
    const DraSynthTask task = synth_dra_task(spec);
    return task.train;
  }
  const MiaSynthTask task = synth_mia_task(spec);
  Dataset out;
  out.num_classes = task.num_classes;
  out.samples = task.members;
  out.samples.insert(out.samples.end(), task.nonmembers.begin(),
                     task.nonmembers.end());
  out.attributes.assign(task.members.size(), 1);
  out.attributes.resize(out.samples.size(), 0);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();
  CLI::App app{"privacy-preserving representation learning workbench"};
  app.require_subcommand(1);

  std::string config_path;
  long long seed = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--seed", seed, "root seed override");
  };

  // train: one defense run at the configured point, checkpoint + record
  auto* train = app.add_subcommand("train", "train one defense run");
  std::string train_out;
  add_common(train);
  train->add_option("--out", train_out, "output directory override");

  // attack: rerun the attack harness against a saved checkpoint
  auto* attack = app.add_subcommand("attack", "attack a saved checkpoint");
  std::string attack_ckpt;
  add_common(attack);
  attack->add_option("--checkpoint", attack_ckpt, "checkpoint path")
      ->required();

  // bounds: bound report from a results record
  auto* bounds_cmd = app.add_subcommand("bounds", "bound report for a record");
  std::string bounds_record;
  add_common(bounds_cmd);
  bounds_cmd->add_option("--record", bounds_record, "results record path")
      ->required();

  // sweep: the full protocol over sweep lists and seeds
  auto* sweep = app.add_subcommand("sweep", "run the configured sweep");
  add_common(sweep);

  // export-reps
  auto* exp = app.add_subcommand("export-reps", "export representations");
  std::string exp_ckpt, exp_out;
  add_common(exp);
  exp->add_option("--checkpoint", exp_ckpt, "checkpoint path")->required();
  exp->add_option("--out", exp_out, "output CSV path")->required();

  // report
  auto* report = app.add_subcommand("report", "summarize results records");
  std::vector<std::string> report_files;
  std::string report_out = "report";
  add_common(report);
  report->add_option("--records", report_files, "record JSON files")
      ->required();
  report->add_option("--out", report_out, "report output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(train)) {
      ExperimentConfig cfg = load_config(config_path, seed);
      if (!train_out.empty()) cfg.out_dir = train_out;
      // single run at the configured operating point
      cfg.sweep_lambda.clear();
      cfg.sweep_epsilon.clear();
      cfg.sweep_sigma.clear();
      const auto records = run(cfg);
      for (const auto& r : records)
        std::cout << r.defense << " " << r.sweep_key << "=" << r.sweep_value
                  << " seed=" << r.seed << " utility=" << r.utility
                  << (r.attack ? " attack=" + std::to_string(r.attack->accuracy)
                               : "")
                  << (r.error_stage.empty() ? "" : " ERROR " + r.error_stage)
                  << "\n";
    } else if (app.got_subcommand(sweep)) {
      ExperimentConfig cfg = load_config(config_path, seed);
      const auto records = run(cfg);
      write_report(records, cfg.out_dir);
      std::cout << records.size() << " records written to " << cfg.out_dir
                << "\n";
    } else if (app.got_subcommand(attack)) {
      ExperimentConfig cfg = load_config(config_path, seed);
      const Checkpoint ckpt = Checkpoint::load(attack_ckpt);
      const std::uint64_t s = cfg.seeds.empty() ? cfg.game.seed : cfg.seeds[0];
      if (ckpt.kind == "pia") {
        SynthSpec spec = cfg.data;
        spec.seed = Rng::mix(s, "data");
        const PiaSynthTask task = synth_pia_bags(spec);
        const auto res = train_pia_attacker(
            ckpt.net("encoder"), task.train_pool.samples, task.train_bags,
            task.test_pool.samples, task.test_bags,
            ckpt.aggregator.value_or(AggregatorMode::Mean),
            ckpt.net("property_head").spec(), cfg.attack,
            Rng::mix(s, "attack"));
        std::cout << "pia attack accuracy " << res.report.accuracy << "\n";
      } else if (ckpt.kind == "dra") {
        SynthSpec spec = cfg.data;
        spec.seed = Rng::mix(s, "data");
        const DraSynthTask task = synth_dra_task(spec);
        const auto res = train_dra_attacker(
            ckpt.net("encoder"), ckpt.perturbation.value(), task.train.samples,
            task.attack_test.samples, task.attack_test.grid_h,
            task.attack_test.grid_w, cfg.attack, Rng::mix(s, "attack"));
        std::cout << "dra attack mse " << res.report.mean_mse << "\n";
      } else {
        SynthSpec spec = cfg.data;
        spec.seed = Rng::mix(s, "data");
        const MiaSynthTask task = synth_mia_task(spec);
        const SplitPlan split =
            make_split(task.members.size(), task.nonmembers.size(),
                       cfg.attack_frac, Rng::mix(s, "split"));
        std::vector<LabeledSample> atrain, atest;
        std::vector<int> utrain, utest;
        const std::size_t nm = task.members.size();
        for (std::size_t g : split.attack_train) {
          atrain.push_back(g < nm ? task.members[g]
                                  : task.nonmembers[g - nm]);
          utrain.push_back(g < nm ? 1 : 0);
        }
        for (std::size_t g : split.attack_test) {
          atest.push_back(g < nm ? task.members[g] : task.nonmembers[g - nm]);
          utest.push_back(g < nm ? 1 : 0);
        }
        const Mlp attacker = train_mia_attacker(
            ckpt.net("encoder"), atrain, utrain,
            ckpt.net("membership_head").spec(), cfg.attack,
            Rng::mix(s, "attack"));
        const AttackReport rep = evaluate_membership_attack(
            ckpt.net("encoder"), attacker, atest, utest);
        std::cout << "mia attack accuracy " << rep.accuracy << "\n";
      }
    } else if (app.got_subcommand(bounds_cmd)) {
      const ResultsRecord rec = ResultsRecord::load(bounds_record);
      if (!rec.bounds)
        throw Error("record carries no bound inputs; rerun with run_bounds=true");
      std::cout << "{\n  \"plug_in_bits\": " << rec.bounds->plug_in_bits
                << ",\n  \"leakage_bound_plug_in\": "
                << rec.bounds->leakage_bound_plug_in
                << ",\n  \"tradeoff_lower\": " << rec.bounds->tradeoff_lower
                << "\n}\n";
    } else if (app.got_subcommand(exp)) {
      ExperimentConfig cfg = load_config(config_path, seed);
      const Checkpoint ckpt = Checkpoint::load(exp_ckpt);
      const std::uint64_t s = cfg.seeds.empty() ? cfg.game.seed : cfg.seeds[0];
      export_representations(ckpt, dataset_for_config(cfg, s), exp_out, s);
      std::cout << "representations written to " << exp_out << "\n";
    } else if (app.got_subcommand(report)) {
      std::vector<ResultsRecord> records;
      for (const auto& f : report_files)
        records.push_back(ResultsRecord::load(f));
      write_report(records, report_out);
      std::cout << "report written to " << report_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
