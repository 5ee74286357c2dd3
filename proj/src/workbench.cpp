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

#include "privrep/workbench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "privrep/rng.hpp"
#include "train_util.hpp"

namespace privrep {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::Mia: return "mia";
    case DefenseKind::Pia: return "pia";
    case DefenseKind::Dra: return "dra";
    case DefenseKind::Advreg: return "advreg";
    case DefenseKind::DpSgd: return "dpsgd";
    case DefenseKind::DpEncoder: return "dp-encoder";
    case DefenseKind::None: return "none";
  }
  return "unknown";
}

DefenseKind defense_kind_from_string(const std::string& s) {
  if (s == "mia") return DefenseKind::Mia;
  if (s == "pia") return DefenseKind::Pia;
  if (s == "dra") return DefenseKind::Dra;
  if (s == "advreg") return DefenseKind::Advreg;
  if (s == "dpsgd") return DefenseKind::DpSgd;
  if (s == "dp-encoder") return DefenseKind::DpEncoder;
  if (s == "none") return DefenseKind::None;
  throw InvalidArgument("unknown defense kind '" + s + "'");
}

// ---------------------------------------------------------------- config

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  std::size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

struct KvReader {
  const std::map<std::string, std::string>& kv;
  std::set<std::string> consumed;

  bool has(const std::string& k) { return kv.count(k) > 0; }
  std::string str(const std::string& k, const std::string& def) {
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    consumed.insert(k);
    return it->second;
  }
  double num(const std::string& k, double def) {
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    consumed.insert(k);
    return std::stod(it->second);
  }
  int integer(const std::string& k, int def) {
    return static_cast<int>(num(k, def));
  }
  bool boolean(const std::string& k, bool def) {
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    consumed.insert(k);
    return it->second == "true" || it->second == "1" || it->second == "yes";
  }
  std::vector<double> list(const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) return {};
    consumed.insert(k);
    std::vector<double> out;
    for (const auto& tok : split_list(it->second))
      if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
  }
};

}  // namespace

ExperimentConfig ExperimentConfig::from_kv(
    const std::map<std::string, std::string>& kv) {
  KvReader r{kv, {}};
  ExperimentConfig c;
  c.kind = defense_kind_from_string(r.str("defense", "mia"));
  c.out_dir = r.str("out_dir", c.out_dir);
  c.workers = r.integer("workers", c.workers);
  c.attack_frac = r.num("attack_frac", c.attack_frac);
  c.rep_dim = r.integer("rep_dim", c.rep_dim);
  c.hidden = r.integer("hidden", c.hidden);
  c.n_shadow = r.integer("n_shadow", c.n_shadow);
  c.run_lira = r.boolean("run_lira", c.run_lira);
  c.run_bounds = r.boolean("run_bounds", c.run_bounds);
  c.recon_eta = r.num("recon_eta", c.recon_eta);
  c.substitute_ablation = r.boolean("substitute_ablation", c.substitute_ablation);
  const std::string agg = r.str("aggregator", "mean");
  if (agg != "mean" && agg != "max")
    throw InvalidArgument("aggregator must be mean or max");
  c.aggregator = agg == "mean" ? AggregatorMode::Mean : AggregatorMode::Max;
  const std::string fam = r.str("family", "gaussian-tanh");
  if (fam != "gaussian-tanh" && fam != "uniform")
    throw InvalidArgument("family must be gaussian-tanh or uniform");
  c.family = fam == "gaussian-tanh" ? PerturbFamily::GaussianTanh
                                    : PerturbFamily::Uniform;

  c.csv_path = r.str("csv.path", "");
  c.csv_label = r.str("csv.label", c.csv_label);
  c.csv_attribute = r.str("csv.attribute", "");

  c.game.lambda = r.num("game.lambda", c.game.lambda);
  c.game.alpha = r.num("game.alpha", c.game.alpha);
  c.game.epsilon = r.num("game.epsilon", c.game.epsilon);
  c.game.mc_samples = r.integer("game.mc_samples", c.game.mc_samples);
  c.game.rounds = r.integer("game.rounds", c.game.rounds);
  c.game.inner_steps = r.integer("game.inner_steps", c.game.inner_steps);
  c.game.phi_epochs = r.integer("game.phi_epochs", c.game.phi_epochs);
  c.game.lr1 = r.num("game.lr1", c.game.lr1);
  c.game.lr2 = r.num("game.lr2", c.game.lr2);
  c.game.lr3 = r.num("game.lr3", c.game.lr3);
  c.game.phi_lr = r.num("game.phi_lr", c.game.phi_lr);
  c.game.batch_size = r.integer("game.batch_size", c.game.batch_size);
  c.game.seed = static_cast<std::uint64_t>(r.num("game.seed", 1));

  c.dp.clip_norm = r.num("dp.clip_norm", c.dp.clip_norm);
  c.dp.noise_sigma = r.num("dp.noise_sigma", c.dp.noise_sigma);
  c.dp.sigma2 = r.num("dp.sigma2", c.dp.sigma2);
  c.dp.batch_size = r.integer("dp.batch_size", c.dp.batch_size);
  c.dp.lr = r.num("dp.lr", c.dp.lr);

  c.data.dim = r.integer("data.dim", c.data.dim);
  c.data.num_classes = r.integer("data.num_classes", c.data.num_classes);
  c.data.separation = r.num("data.separation", c.data.separation);
  c.data.label_noise = r.num("data.label_noise", c.data.label_noise);
  c.data.n_members = r.integer("data.n_members", c.data.n_members);
  c.data.n_nonmembers = r.integer("data.n_nonmembers", c.data.n_nonmembers);
  c.data.n_utility_test = r.integer("data.n_utility_test", c.data.n_utility_test);
  c.data.attr_shift = r.num("data.attr_shift", c.data.attr_shift);
  if (r.has("data.ratio_grid")) c.data.ratio_grid = r.list("data.ratio_grid");
  c.data.bag_size_range.first = r.integer("data.bag_min", c.data.bag_size_range.first);
  c.data.bag_size_range.second = r.integer("data.bag_max", c.data.bag_size_range.second);
  c.data.n_train_bags = r.integer("data.n_train_bags", c.data.n_train_bags);
  c.data.n_test_bags = r.integer("data.n_test_bags", c.data.n_test_bags);
  c.data.n_reference = r.integer("data.n_reference", c.data.n_reference);
  c.data.grid_shaped = r.boolean("data.grid_shaped", c.data.grid_shaped);

  c.attack.epochs = r.integer("attack.epochs", c.attack.epochs);
  c.attack.batch_size = r.integer("attack.batch_size", c.attack.batch_size);
  c.attack.lr = r.num("attack.lr", c.attack.lr);

  c.sweep_lambda = r.list("sweep.lambda");
  c.sweep_epsilon = r.list("sweep.epsilon");
  c.sweep_sigma = r.list("sweep.sigma");
  for (double s : r.list("seeds"))
    c.seeds.push_back(static_cast<std::uint64_t>(s));

  for (const auto& [k, v] : kv)
    if (!r.consumed.count(k))
      throw InvalidArgument("unknown config key '" + k + "'");
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (kv.count(key))
      throw Error("config line " + std::to_string(lineno) + ": duplicate key " + key);
    kv[key] = value;
  }
  ExperimentConfig c = from_kv(kv);
  c.apply_env_overrides();
  return c;
}

void ExperimentConfig::apply_env_overrides() {
  if (const char* dir = std::getenv("PRIVREP_OUT_DIR")) out_dir = dir;
  // PRIVREP_THREADS is handled at process start by the CLI
}

void ExperimentConfig::validate() const {
  game.validate();
  if (attack_frac <= 0.0 || attack_frac >= 1.0)
    throw InvalidArgument("attack_frac must lie in (0,1)");
  if (rep_dim <= 0 || hidden <= 0) throw InvalidArgument("bad architecture dims");
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  if (sweep_points().empty()) throw InvalidArgument("sweep list empty");
}

std::vector<double> ExperimentConfig::sweep_points() const {
  switch (kind) {
    case DefenseKind::Mia:
    case DefenseKind::Pia:
    case DefenseKind::Advreg:
      return sweep_lambda.empty() ? std::vector<double>{game.lambda}
                                  : sweep_lambda;
    case DefenseKind::Dra:
      return sweep_epsilon.empty() ? std::vector<double>{game.epsilon}
                                   : sweep_epsilon;
    case DefenseKind::DpSgd:
      return sweep_sigma.empty() ? std::vector<double>{dp.noise_sigma}
                                 : sweep_sigma;
    case DefenseKind::DpEncoder:
      return sweep_sigma.empty() ? std::vector<double>{dp.sigma2} : sweep_sigma;
    case DefenseKind::None:
      return {0.0};
  }
  return {};
}

std::string ExperimentConfig::sweep_key() const {
  switch (kind) {
    case DefenseKind::Mia:
    case DefenseKind::Pia:
    case DefenseKind::Advreg:
      return "lambda";
    case DefenseKind::Dra:
      return "epsilon";
    case DefenseKind::DpSgd:
    case DefenseKind::DpEncoder:
      return "sigma";
    case DefenseKind::None:
      return "none";
  }
  return "none";
}

// ------------------------------------------------------------ json records

namespace {

json attack_report_to_json(const AttackReport& r) {
  json j;
  j["kind"] = r.kind;
  j["accuracy"] = r.accuracy;
  j["roc"] = r.roc;
  json tpr = json::object();
  for (const auto& [f, t] : r.tpr_at) tpr[std::to_string(f)] = t;
  j["tpr_at"] = tpr;
  j["per_class_accuracy"] = r.per_class_accuracy;
  return j;
}

AttackReport attack_report_from_json(const json& j) {
  AttackReport r;
  r.kind = j.at("kind").get<std::string>();
  r.accuracy = j.at("accuracy").get<double>();
  for (const auto& p : j.at("roc"))
    r.roc.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  for (const auto& [k, v] : j.at("tpr_at").items())
    r.tpr_at[std::stod(k)] = v.get<double>();
  r.per_class_accuracy = j.at("per_class_accuracy").get<std::vector<double>>();
  return r;
}

json recon_report_to_json(const ReconReport& r) {
  return json{{"per_sample_mse", r.per_sample_mse},
              {"mean_mse", r.mean_mse},
              {"mean_ssim", r.mean_ssim},
              {"mean_psnr", r.mean_psnr},
              {"has_image_metrics", r.has_image_metrics}};
}

ReconReport recon_report_from_json(const json& j) {
  ReconReport r;
  r.per_sample_mse = j.at("per_sample_mse").get<std::vector<double>>();
  r.mean_mse = j.at("mean_mse").get<double>();
  r.mean_ssim = j.at("mean_ssim").get<double>();
  r.mean_psnr = j.at("mean_psnr").get<double>();
  r.has_image_metrics = j.at("has_image_metrics").get<bool>();
  return r;
}

json bound_report_to_json(const BoundReport& b) {
  return json{{"plug_in_bits", b.plug_in_bits},
              {"ce_upper_bits", b.ce_upper_bits},
              {"leakage_bound_plug_in", b.leakage_bound_plug_in},
              {"leakage_bound_ce", b.leakage_bound_ce},
              {"advantage", b.advantage},
              {"delta_cond", b.delta_cond},
              {"delta_marg", b.delta_marg},
              {"r_bound", b.r_bound},
              {"lipschitz", b.lipschitz},
              {"tradeoff_lower", b.tradeoff_lower},
              {"dra_error_lower", b.dra_error_lower},
              {"note", b.note}};
}

BoundReport bound_report_from_json(const json& j) {
  BoundReport b;
  b.plug_in_bits = j.at("plug_in_bits").get<double>();
  b.ce_upper_bits = j.at("ce_upper_bits").get<double>();
  b.leakage_bound_plug_in = j.at("leakage_bound_plug_in").get<double>();
  b.leakage_bound_ce = j.at("leakage_bound_ce").get<double>();
  b.advantage = j.at("advantage").get<double>();
  b.delta_cond = j.at("delta_cond").get<double>();
  b.delta_marg = j.at("delta_marg").get<double>();
  b.r_bound = j.at("r_bound").get<double>();
  b.lipschitz = j.at("lipschitz").get<double>();
  b.tradeoff_lower = j.at("tradeoff_lower").get<double>();
  b.dra_error_lower = j.at("dra_error_lower").get<double>();
  b.note = j.at("note").get<std::string>();
  return b;
}

}  // namespace

std::string ResultsRecord::to_json_string() const {
  json j;
  j["version"] = version;
  j["defense"] = defense;
  j["sweep_key"] = sweep_key;
  j["sweep_value"] = sweep_value;
  j["seed"] = seed;
  j["config"] = config;
  j["round_losses"] = round_losses;
  j["utility"] = utility;
  if (attack) j["attack"] = attack_report_to_json(*attack);
  if (lira) j["lira"] = attack_report_to_json(*lira);
  if (substitute_attack)
    j["substitute_attack"] = attack_report_to_json(*substitute_attack);
  if (recon) j["recon"] = recon_report_to_json(*recon);
  if (bounds) j["bounds"] = bound_report_to_json(*bounds);
  j["wall_clock_s"] = wall_clock_s;
  j["error_stage"] = error_stage;
  return j.dump(2);
}

ResultsRecord ResultsRecord::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  ResultsRecord r;
  r.version = j.at("version").get<std::string>();
  if (r.version != ResultsRecord{}.version)
    throw Error("incompatible record version " + r.version);
  r.defense = j.at("defense").get<std::string>();
  r.sweep_key = j.at("sweep_key").get<std::string>();
  r.sweep_value = j.at("sweep_value").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config = j.at("config").get<std::map<std::string, std::string>>();
  r.round_losses =
      j.at("round_losses").get<std::vector<std::array<double, 3>>>();
  r.utility = j.at("utility").get<double>();
  if (j.count("attack")) r.attack = attack_report_from_json(j["attack"]);
  if (j.count("lira")) r.lira = attack_report_from_json(j["lira"]);
  if (j.count("substitute_attack"))
    r.substitute_attack = attack_report_from_json(j["substitute_attack"]);
  if (j.count("recon")) r.recon = recon_report_from_json(j["recon"]);
  if (j.count("bounds")) r.bounds = bound_report_from_json(j["bounds"]);
  r.wall_clock_s = j.at("wall_clock_s").get<double>();
  r.error_stage = j.at("error_stage").get<std::string>();
  return r;
}

void ResultsRecord::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write record " + path);
  out << to_json_string() << "\n";
}

ResultsRecord ResultsRecord::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read record " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

// ------------------------------------------------------------- checkpoints

namespace {

json mlp_spec_to_json(const std::string& name, const Mlp& net) {
  return json{{"name", name},
              {"widths", net.spec().widths},
              {"activation",
               net.spec().activation == Activation::Tanh ? "tanh" : "relu"},
              {"activate_output", net.spec().activate_output},
              {"softmax_output", net.spec().softmax_output}};
}

MlpSpec mlp_spec_from_json(const json& j) {
  MlpSpec spec;
  spec.widths = j.at("widths").get<std::vector<int>>();
  spec.activation = j.at("activation").get<std::string>() == "tanh"
                        ? Activation::Tanh
                        : Activation::Relu;
  spec.activate_output = j.at("activate_output").get<bool>();
  spec.softmax_output = j.at("softmax_output").get<bool>();
  return spec;
}

}  // namespace

const Mlp& Checkpoint::net(const std::string& name) const {
  for (const auto& [n, m] : networks)
    if (n == name) return m;
  throw InvalidArgument("checkpoint has no network '" + name + "'");
}

void Checkpoint::save(const std::string& path) const {
  json header;
  header["kind"] = kind;
  header["networks"] = json::array();
  for (const auto& [name, net] : networks)
    header["networks"].push_back(mlp_spec_to_json(name, net));
  if (perturbation) {
    header["perturbation"] = json{
        {"mu", perturbation->mu},
        {"log_sigma", perturbation->log_sigma},
        {"epsilon", perturbation->epsilon},
        {"family", perturbation->family == PerturbFamily::GaussianTanh
                       ? "gaussian-tanh"
                       : "uniform"}};
  }
  if (aggregator)
    header["aggregator"] = *aggregator == AggregatorMode::Mean ? "mean" : "max";
  if (!ratio_grid.empty()) header["ratio_grid"] = ratio_grid;
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  out.write("PRCK", 4);
  const std::uint32_t version = 1;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  const std::uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
  out.write(htext.data(), static_cast<std::streamsize>(hlen));
  for (const auto& [name, net] : networks) {
    const std::uint64_t count = net.num_params();
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(net.params().data()),
              static_cast<std::streamsize>(count * sizeof(double)));
  }
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "PRCK")
    throw Error("bad checkpoint magic in " + path);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != 1) throw Error("unsupported checkpoint version");
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  const json header = json::parse(htext);

  Checkpoint ckpt;
  ckpt.kind = header.at("kind").get<std::string>();
  for (const auto& jn : header.at("networks")) {
    Mlp net(mlp_spec_from_json(jn));
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (count != net.num_params())
      throw Error("checkpoint parameter count mismatch for network " +
                  jn.at("name").get<std::string>());
    in.read(reinterpret_cast<char*>(net.params().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw Error("truncated checkpoint " + path);
    ckpt.networks.emplace_back(jn.at("name").get<std::string>(),
                               std::move(net));
  }
  if (header.count("perturbation")) {
    PerturbationParams p;
    const auto& jp = header["perturbation"];
    p.mu = jp.at("mu").get<Vec>();
    p.log_sigma = jp.at("log_sigma").get<Vec>();
    p.epsilon = jp.at("epsilon").get<double>();
    p.family = jp.at("family").get<std::string>() == "uniform"
                   ? PerturbFamily::Uniform
                   : PerturbFamily::GaussianTanh;
    ckpt.perturbation = std::move(p);
  }
  if (header.count("aggregator"))
    ckpt.aggregator = header["aggregator"].get<std::string>() == "mean"
                          ? AggregatorMode::Mean
                          : AggregatorMode::Max;
  if (header.count("ratio_grid"))
    ckpt.ratio_grid = header["ratio_grid"].get<std::vector<double>>();
  return ckpt;
}

// ------------------------------------------------------------ run plumbing

namespace {

std::map<std::string, std::string> config_snapshot(
    const ExperimentConfig& c, double sweep_value, std::uint64_t seed) {
  std::map<std::string, std::string> m;
  auto put = [&](const std::string& k, double v) {
    std::ostringstream os;
    os << v;
    m[k] = os.str();
  };
  m["defense"] = to_string(c.kind);
  m["sweep_key"] = c.sweep_key();
  put("sweep_value", sweep_value);
  put("seed", static_cast<double>(seed));
  put("game.lambda", c.game.lambda);
  put("game.alpha", c.game.alpha);
  put("game.epsilon", c.game.epsilon);
  put("game.rounds", c.game.rounds);
  put("game.inner_steps", c.game.inner_steps);
  put("game.batch_size", c.game.batch_size);
  put("game.lr1", c.game.lr1);
  put("game.lr2", c.game.lr2);
  put("game.lr3", c.game.lr3);
  put("game.phi_lr", c.game.phi_lr);
  put("game.mc_samples", c.game.mc_samples);
  put("data.dim", c.data.dim);
  put("data.n_members", c.data.n_members);
  put("data.separation", c.data.separation);
  put("data.label_noise", c.data.label_noise);
  put("attack_frac", c.attack_frac);
  put("rep_dim", c.rep_dim);
  put("hidden", c.hidden);
  m["family"] = c.family == PerturbFamily::GaussianTanh ? "gaussian-tanh"
                                                        : "uniform";
  m["aggregator"] = c.aggregator == AggregatorMode::Mean ? "mean" : "max";
  return m;
}

struct MembershipProtocol {
  MiaSynthTask task;
  SplitPlan split;
  std::vector<LabeledSample> attack_train, attack_test;
  std::vector<int> u_train, u_test;
  MiaTrainData train_data;
};

const LabeledSample& sample_at(const MiaSynthTask& task, std::size_t global) {
  return global < task.members.size()
             ? task.members[global]
             : task.nonmembers[global - task.members.size()];
}

MembershipProtocol build_membership_protocol(const ExperimentConfig& c,
                                             std::uint64_t run_seed) {
  MembershipProtocol p;
  if (!c.csv_path.empty()) {
    const Dataset csv = load_csv(c.csv_path, c.csv_label,
                                 c.csv_attribute.empty()
                                     ? std::nullopt
                                     : std::optional(c.csv_attribute));
    p.task.num_classes = csv.num_classes;
    if (!csv.attributes.empty()) {
      for (std::size_t i = 0; i < csv.samples.size(); ++i)
        (csv.attributes[i] ? p.task.members : p.task.nonmembers)
            .push_back(csv.samples[i]);
    } else {
      const std::size_t half = csv.samples.size() / 2;
      p.task.members.assign(csv.samples.begin(), csv.samples.begin() + half);
      p.task.nonmembers.assign(csv.samples.begin() + half, csv.samples.end());
    }
    p.task.utility_test = p.task.nonmembers;
  } else {
    SynthSpec spec = c.data;
    spec.seed = Rng::mix(run_seed, "data");
    p.task = synth_mia_task(spec);
  }
  if (p.task.members.empty() || p.task.nonmembers.empty())
    throw EmptyDataset("membership protocol: empty member or non-member set");

  p.split = make_split(p.task.members.size(), p.task.nonmembers.size(),
                       c.attack_frac, Rng::mix(run_seed, "split"));

  const std::size_t nm = p.task.members.size();
  for (std::size_t g : p.split.attack_train) {
    p.attack_train.push_back(sample_at(p.task, g));
    p.u_train.push_back(g < nm ? 1 : 0);
    if (g < nm)
      p.train_data.l1_members.push_back(g);
    else
      p.train_data.l1_nonmembers.push_back(g - nm);
  }
  for (std::size_t g : p.split.attack_test) {
    p.attack_test.push_back(sample_at(p.task, g));
    p.u_test.push_back(g < nm ? 1 : 0);
  }
  p.train_data.members = p.task.members;
  p.train_data.nonmembers = p.task.nonmembers;
  return p;
}

double delta_marginal(std::span<const int> y) {
  std::size_t y1 = 0;
  for (int v : y) y1 += v ? 1 : 0;
  const double p = static_cast<double>(y1) / static_cast<double>(y.size());
  return std::abs(p - (1.0 - p));
}

double max_rep_norm(std::span<const Vec> reps) {
  double mx = 0.0;
  for (const Vec& r : reps) {
    double sq = 0.0;
    for (double v : r) sq += v * v;
    mx = std::max(mx, std::sqrt(sq));
  }
  return mx;
}

BoundReport membership_bound_report(const Mlp& encoder,
                                    const Mlp& attack_classifier,
                                    const Mlp& utility_head,
                                    std::span<const LabeledSample> test,
                                    std::span<const int> u_test, Exec exec) {
  BoundReport b;
  const CondEntropyEstimates est =
      conditional_entropy_estimates(encoder, attack_classifier, test, u_test);
  b.plug_in_bits = est.plug_in_bits;
  b.ce_upper_bits = est.ce_upper_bits;
  b.leakage_bound_plug_in = mia_leakage_bound(est.plug_in_bits);
  b.leakage_bound_ce = mia_leakage_bound(std::min(est.ce_upper_bits, 1.0));

  const auto reps = encode_samples(encoder, test, exec);
  std::vector<int> decisions(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const Vec q = attack_classifier.forward(reps[i]);
    decisions[i] = q[1] > q[0] ? 1 : 0;
  }
  b.advantage = empirical_advantage(decisions, u_test);
  b.r_bound = max_rep_norm(reps);
  b.lipschitz = lipschitz_upper(utility_head);

  bool binary = true;
  std::vector<int> y;
  y.reserve(test.size());
  for (const auto& s : test) {
    if (s.label > 1) binary = false;
    y.push_back(s.label);
  }
  if (binary) {
    const auto [dc, dm] = delta_constants(y, u_test);
    b.delta_cond = dc;
    b.delta_marg = dm;
    b.tradeoff_lower = tradeoff_bound(
        TradeoffInputs{dc, b.r_bound, b.lipschitz, b.advantage},
        TradeoffVariant::Mia);
  } else {
    b.note += "; tradeoff skipped (non-binary task)";
  }
  return b;
}

ResultsRecord run_membership(const ExperimentConfig& c, double lambda,
                             std::uint64_t seed, Checkpoint* ckpt) {
  ResultsRecord rec;
  const MembershipProtocol p = build_membership_protocol(c, seed);
  const int input_dim = static_cast<int>(p.task.members.front().features.size());

  GameConfig g = c.game;
  g.lambda = lambda;
  g.alpha = 0.0;  // entropy weight belongs to the reconstruction game
  g.seed = Rng::mix(seed, "train");

  rec.error_stage = "defense-training";
  if (c.kind == DefenseKind::Advreg) {
    const AdvregState state = train_advreg_defense(p.train_data, g,
                                                   p.task.num_classes, c.hidden);
    for (const auto& [l1, l2] : state.round_losses)
      rec.round_losses.push_back({l1, l2, 0.0});
    rec.error_stage = "attack-training";
    const Mlp attacker = train_mia_attacker(
        state.confidence_net, p.attack_train, p.u_train,
        state.membership_head.spec(), c.attack, Rng::mix(seed, "attack"));
    rec.error_stage = "evaluation";
    // the confidence net predicts labels directly
    {
      std::size_t hits = 0;
      for (const auto& s : p.task.utility_test) {
        const Vec q = state.confidence_net.forward(s.features);
        if (static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin()) ==
            s.label)
          ++hits;
      }
      rec.utility = static_cast<double>(hits) / p.task.utility_test.size();
    }
    rec.attack = evaluate_membership_attack(state.confidence_net, attacker,
                                            p.attack_test, p.u_test);
    if (c.run_lira)
      rec.lira = shadow_lira(state.confidence_net,
                             state.membership_head.spec(), p.attack_train,
                             p.u_train, p.attack_test, p.u_test, c.n_shadow,
                             Rng::mix(seed, "lira"), c.attack);
    if (ckpt) {
      ckpt->kind = to_string(c.kind);
      ckpt->networks.emplace_back("encoder", state.confidence_net);
      ckpt->networks.emplace_back("membership_head", state.membership_head);
    }
    rec.error_stage.clear();
    return rec;
  }

  const MiaArch arch =
      MiaArch::defaults(input_dim, p.task.num_classes, c.rep_dim, c.hidden);
  const MiaGameState state = train_mia_defense(p.train_data, g, arch);
  for (const auto& [l1, l2] : state.round_losses)
    rec.round_losses.push_back({l1, l2, 0.0});

  rec.error_stage = "attack-training";
  const Mlp attacker = train_mia_attacker(
      state.encoder, p.attack_train, p.u_train, arch.membership_head, c.attack,
      Rng::mix(seed, "attack"));

  rec.error_stage = "evaluation";
  rec.utility =
      utility_accuracy(state.encoder, state.utility_head, p.task.utility_test);
  rec.attack = evaluate_membership_attack(state.encoder, attacker,
                                          p.attack_test, p.u_test);
  if (c.run_lira)
    rec.lira = shadow_lira(state.encoder, arch.membership_head, p.attack_train,
                           p.u_train, p.attack_test, p.u_test, c.n_shadow,
                           Rng::mix(seed, "lira"), c.attack);
  if (c.run_bounds) {
    rec.error_stage = "bounds";
    rec.bounds = membership_bound_report(state.encoder, attacker,
                                         state.utility_head, p.attack_test,
                                         p.u_test, Exec::Parallel);
  }
  if (ckpt) {
    ckpt->kind = to_string(c.kind);
    ckpt->networks.emplace_back("encoder", state.encoder);
    ckpt->networks.emplace_back("membership_head", state.membership_head);
    ckpt->networks.emplace_back("utility_head", state.utility_head);
  }
  rec.error_stage.clear();
  return rec;
}

ResultsRecord run_pia(const ExperimentConfig& c, double lambda,
                      std::uint64_t seed, Checkpoint* ckpt) {
  ResultsRecord rec;
  SynthSpec spec = c.data;
  spec.seed = Rng::mix(seed, "data");
  const PiaSynthTask task = synth_pia_bags(spec);
  const int input_dim = spec.dim;
  const int num_props = static_cast<int>(spec.ratio_grid.size());

  GameConfig g = c.game;
  g.lambda = lambda;
  g.alpha = 0.0;
  g.seed = Rng::mix(seed, "train");

  rec.error_stage = "defense-training";
  const PiaArch arch = PiaArch::defaults(input_dim, task.train_pool.num_classes,
                                         num_props, c.rep_dim, c.hidden);
  const PiaGameState state =
      train_pia_defense(task.train_pool.samples, task.train_bags, g,
                        c.aggregator, arch);
  for (const auto& [l1, l2] : state.round_losses)
    rec.round_losses.push_back({l1, l2, 0.0});

  rec.error_stage = "attack-training";
  const PiaAttackResult matched = train_pia_attacker(
      state.encoder, task.train_pool.samples, task.train_bags,
      task.test_pool.samples, task.test_bags, c.aggregator, arch.property_head,
      c.attack, Rng::mix(seed, "attack"));
  rec.attack = matched.report;
  if (c.substitute_ablation) {
    const AggregatorMode other = c.aggregator == AggregatorMode::Mean
                                     ? AggregatorMode::Max
                                     : AggregatorMode::Mean;
    rec.substitute_attack =
        train_pia_attacker(state.encoder, task.train_pool.samples,
                           task.train_bags, task.test_pool.samples,
                           task.test_bags, other, arch.property_head, c.attack,
                           Rng::mix(seed, "attack-substitute"))
            .report;
    rec.substitute_attack->kind = "pia-substitute";
  }

  rec.error_stage = "evaluation";
  rec.utility = utility_accuracy(state.encoder, state.utility_head,
                                 task.test_pool.samples);
  if (c.run_bounds) {
    rec.error_stage = "bounds";
    BoundReport b;
    // conditional entropy of the property over aggregated test bags
    std::vector<Vec> agg;
    std::vector<int> labels;
    const auto reps = encode_samples(state.encoder, task.test_pool.samples);
    for (const auto& bag : task.test_bags) {
      std::vector<Vec> members;
      for (std::size_t i : bag.sample_indices) members.push_back(reps[i]);
      agg.push_back(aggregate(members, c.aggregator));
      labels.push_back(bag.property_value);
    }
    const CondEntropyEstimates est =
        conditional_entropy_from_reps(matched.classifier, agg, labels);
    b.plug_in_bits = est.plug_in_bits;
    b.ce_upper_bits = est.ce_upper_bits;
    b.leakage_bound_plug_in = mia_leakage_bound(est.plug_in_bits);
    b.leakage_bound_ce =
        mia_leakage_bound(std::min(est.ce_upper_bits,
                                   std::log2(double(num_props))));
    b.r_bound = max_rep_norm(agg);
    b.lipschitz = lipschitz_upper(state.utility_head);
    b.note += "; tradeoff skipped (property not binary)";
    rec.bounds = b;
  }
  if (ckpt) {
    ckpt->kind = to_string(c.kind);
    ckpt->networks.emplace_back("encoder", state.encoder);
    ckpt->networks.emplace_back("property_head", state.property_head);
    ckpt->networks.emplace_back("utility_head", state.utility_head);
    ckpt->aggregator = c.aggregator;
    ckpt->ratio_grid = spec.ratio_grid;
  }
  rec.error_stage.clear();
  return rec;
}

ResultsRecord run_dra(const ExperimentConfig& c, double epsilon,
                      std::uint64_t seed, Checkpoint* ckpt) {
  ResultsRecord rec;
  SynthSpec spec = c.data;
  spec.seed = Rng::mix(seed, "data");
  const DraSynthTask task = synth_dra_task(spec);
  const int input_dim = spec.dim;

  GameConfig g = c.game;
  g.epsilon = epsilon;
  g.seed = Rng::mix(seed, "train");

  rec.error_stage = "defense-training";
  const DraArch arch = DraArch::defaults(input_dim, task.train.num_classes,
                                         c.rep_dim, c.hidden);
  const DraGameState state =
      train_dra_defense(task.train.samples, g, arch, c.family);
  rec.round_losses = state.round_losses;

  rec.error_stage = "attack-training";
  const DraAttackResult attack = train_dra_attacker(
      state.encoder, state.perturbation, task.train.samples,
      task.attack_test.samples, task.attack_test.grid_h,
      task.attack_test.grid_w, c.attack, Rng::mix(seed, "attack"));
  rec.recon = attack.report;

  rec.error_stage = "evaluation";
  rec.utility = utility_accuracy(state.encoder, state.utility_head,
                                 task.utility_test.samples);
  if (c.run_bounds) {
    rec.error_stage = "bounds";
    BoundReport b;
    // JSD surrogate offset by 2 ln 2 as a rough per-sample MI proxy
    const double jsd_mean =
        state.round_losses.empty() ? 0.0 : state.round_losses.back()[0];
    const double mi_est = std::max(0.0, jsd_mean + 2.0 * 0.6931471805599453);
    b.dra_error_lower =
        dra_error_bound(mi_est, GeometrySpec::unit_hypercube(input_dim,
                                                             c.recon_eta));
    b.r_bound = state.geometry.max_perturbed_norm;
    b.lipschitz = lipschitz_upper(state.utility_head);
    // eta-exact success event against the binary task label
    std::vector<int> success, y;
    Rng noise(Rng::mix(seed, "bounds-noise"));
    for (std::size_t i = 0; i < task.attack_test.samples.size(); ++i) {
      const auto& s = task.attack_test.samples[i];
      Vec r = state.encoder.forward(s.features);
      const Vec delta = sample_perturbation(state.perturbation, noise);
      for (std::size_t k = 0; k < r.size(); ++k) r[k] += delta[k];
      const Vec rechat = attack.decoder.forward(r);
      double sq = 0.0;
      for (std::size_t k = 0; k < rechat.size(); ++k) {
        const double d = rechat[k] - s.features[k];
        sq += d * d;
      }
      success.push_back(std::sqrt(sq) <= c.recon_eta ? 1 : 0);
      y.push_back(s.label);
    }
    bool binary = task.attack_test.num_classes == 2;
    if (binary) {
      b.delta_marg = delta_marginal(y);
      bool both = false, seen0 = false, seen1 = false;
      for (int v : y) (v ? seen1 : seen0) = true;
      both = seen0 && seen1;
      if (both) {
        b.advantage = empirical_advantage_dra(success, y);
        b.tradeoff_lower = tradeoff_bound(
            TradeoffInputs{b.delta_marg, b.r_bound, b.lipschitz, b.advantage},
            TradeoffVariant::Dra);
      }
    } else {
      b.note += "; tradeoff skipped (non-binary task)";
    }
    b.note += "; eta-exact event with eta=" + std::to_string(c.recon_eta);
    rec.bounds = b;
  }
  if (ckpt) {
    ckpt->kind = to_string(c.kind);
    ckpt->networks.emplace_back("encoder", state.encoder);
    ckpt->networks.emplace_back("critic", state.critic);
    ckpt->networks.emplace_back("utility_head", state.utility_head);
    ckpt->perturbation = state.perturbation;
  }
  rec.error_stage.clear();
  return rec;
}

// Plain supervised encoder+head training (the no-defense baseline and the
// first stage of the dp-encoder pipeline).
std::pair<Mlp, Mlp> train_supervised(std::span<const LabeledSample> train,
                                     const GameConfig& g, const MiaArch& arch) {
  Rng root(g.seed);
  Rng init = root.substream("init");
  Rng batches = root.substream("batches");
  Mlp encoder = Mlp::initialized(arch.encoder, init);
  Mlp head = Mlp::initialized(arch.utility_head, init);
  OptimizerState opt_e = OptimizerState::adam(g.lr3);
  OptimizerState opt_h = OptimizerState::adam(g.lr2);
  for (int t = 0; t < g.rounds; ++t) {
    for (int i = 0; i < g.inner_steps; ++i) {
      const auto idx = detail::draw_indices(batches, train.size(),
                                            g.batch_size);
      std::vector<Vec> xs;
      std::vector<int> ys;
      for (std::size_t k : idx) {
        xs.push_back(train[k].features);
        ys.push_back(train[k].label);
      }
      Vec ge(encoder.num_params(), 0.0), gh(head.num_params(), 0.0);
      const double loss =
          detail::ce_chain_batch(encoder, head, xs, ys, &ge, &gh,
                                 Exec::Parallel);
      check_finite(loss, "train_supervised");
      opt_h.step(head.params(), gh);
      opt_e.step(encoder.params(), ge);
    }
  }
  return {std::move(encoder), std::move(head)};
}

ResultsRecord run_dpsgd(const ExperimentConfig& c, double noise_sigma,
                        std::uint64_t seed, Checkpoint* ckpt) {
  ResultsRecord rec;
  const MembershipProtocol p = build_membership_protocol(c, seed);
  const int input_dim = static_cast<int>(p.task.members.front().features.size());
  const MiaArch arch =
      MiaArch::defaults(input_dim, p.task.num_classes, c.rep_dim, c.hidden);

  GameConfig g = c.game;
  g.seed = Rng::mix(seed, "train");
  DpConfig dp = c.dp;
  dp.noise_sigma = noise_sigma;

  rec.error_stage = "defense-training";
  const DpSgdModel model = train_dpsgd(p.task.members, g, dp, arch.encoder,
                                       arch.utility_head);

  rec.error_stage = "attack-training";
  const Mlp attacker =
      train_mia_attacker(model.encoder, p.attack_train, p.u_train,
                         arch.membership_head, c.attack,
                         Rng::mix(seed, "attack"));
  rec.error_stage = "evaluation";
  rec.utility = utility_accuracy(model.encoder, model.utility_head,
                                 p.task.utility_test);
  rec.attack = evaluate_membership_attack(model.encoder, attacker,
                                          p.attack_test, p.u_test);
  if (c.run_lira)
    rec.lira = shadow_lira(model.encoder, arch.membership_head, p.attack_train,
                           p.u_train, p.attack_test, p.u_test, c.n_shadow,
                           Rng::mix(seed, "lira"), c.attack);
  if (ckpt) {
    ckpt->kind = to_string(c.kind);
    ckpt->networks.emplace_back("encoder", model.encoder);
    ckpt->networks.emplace_back("utility_head", model.utility_head);
  }
  rec.error_stage.clear();
  return rec;
}

ResultsRecord run_dp_encoder(const ExperimentConfig& c, double sigma2,
                             std::uint64_t seed, Checkpoint* ckpt) {
  ResultsRecord rec;
  const MembershipProtocol p = build_membership_protocol(c, seed);
  const int input_dim = static_cast<int>(p.task.members.front().features.size());
  const MiaArch arch =
      MiaArch::defaults(input_dim, p.task.num_classes, c.rep_dim, c.hidden);

  GameConfig g = c.game;
  g.seed = Rng::mix(seed, "train");

  rec.error_stage = "defense-training";
  const auto [encoder, clean_head] = train_supervised(p.task.members, g, arch);

  // published representations carry one Gaussian noise draw each
  Rng noise(Rng::mix(seed, "noise"));
  auto noisy_reps = [&](std::span<const LabeledSample> samples) {
    const auto reps = encode_samples(encoder, samples);
    return dp_encoder_noise(reps, sigma2, noise);
  };
  const auto train_reps = noisy_reps(p.task.members);
  std::vector<int> train_labels;
  for (const auto& s : p.task.members) train_labels.push_back(s.label);

  AttackTrainConfig util_cfg = c.attack;
  const Mlp noisy_head =
      train_classifier_head(arch.utility_head, train_reps, train_labels,
                            util_cfg, Rng::mix(seed, "train-noisy-head"));

  rec.error_stage = "attack-training";
  const auto attack_train_reps = noisy_reps(p.attack_train);
  const Mlp attacker =
      train_classifier_head(arch.membership_head, attack_train_reps, p.u_train,
                            c.attack, Rng::mix(seed, "attack"));

  rec.error_stage = "evaluation";
  const auto test_reps = noisy_reps(p.task.utility_test);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test_reps.size(); ++i) {
    const Vec q = noisy_head.forward(test_reps[i]);
    if (static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin()) ==
        p.task.utility_test[i].label)
      ++hits;
  }
  rec.utility = static_cast<double>(hits) / test_reps.size();

  const auto attack_test_reps = noisy_reps(p.attack_test);
  Vec scores(attack_test_reps.size());
  std::vector<int> decisions(attack_test_reps.size());
  std::size_t ahits = 0;
  for (std::size_t i = 0; i < attack_test_reps.size(); ++i) {
    const Vec q = attacker.forward(attack_test_reps[i]);
    scores[i] = q[1];
    decisions[i] = q[1] > q[0] ? 1 : 0;
    if (decisions[i] == p.u_test[i]) ++ahits;
  }
  AttackReport rep = roc_and_tpr(scores, p.u_test);
  rep.kind = "mia";
  rep.accuracy = static_cast<double>(ahits) / attack_test_reps.size();
  rec.attack = rep;
  if (ckpt) {
    ckpt->kind = to_string(c.kind);
    ckpt->networks.emplace_back("encoder", encoder);
    ckpt->networks.emplace_back("utility_head", noisy_head);
  }
  rec.error_stage.clear();
  return rec;
}

ResultsRecord run_none(const ExperimentConfig& c, std::uint64_t seed,
                       Checkpoint* ckpt) {
  ResultsRecord rec;
  const MembershipProtocol p = build_membership_protocol(c, seed);
  const int input_dim = static_cast<int>(p.task.members.front().features.size());
  const MiaArch arch =
      MiaArch::defaults(input_dim, p.task.num_classes, c.rep_dim, c.hidden);
  GameConfig g = c.game;
  g.seed = Rng::mix(seed, "train");
  rec.error_stage = "defense-training";
  const auto [encoder, head] = train_supervised(p.task.members, g, arch);
  rec.error_stage = "evaluation";
  rec.utility = utility_accuracy(encoder, head, p.task.utility_test);
  if (ckpt) {
    ckpt->kind = to_string(c.kind);
    ckpt->networks.emplace_back("encoder", encoder);
    ckpt->networks.emplace_back("utility_head", head);
  }
  rec.error_stage.clear();
  return rec;
}

}  // namespace

ResultsRecord run_single(const ExperimentConfig& config, double sweep_value,
                         std::uint64_t seed, Checkpoint* checkpoint_out) {
  const auto start = std::chrono::steady_clock::now();
  ResultsRecord rec;
  try {
    switch (config.kind) {
      case DefenseKind::Mia:
      case DefenseKind::Advreg:
        rec = run_membership(config, sweep_value, seed, checkpoint_out);
        break;
      case DefenseKind::Pia:
        rec = run_pia(config, sweep_value, seed, checkpoint_out);
        break;
      case DefenseKind::Dra:
        rec = run_dra(config, sweep_value, seed, checkpoint_out);
        break;
      case DefenseKind::DpSgd:
        rec = run_dpsgd(config, sweep_value, seed, checkpoint_out);
        break;
      case DefenseKind::DpEncoder:
        rec = run_dp_encoder(config, sweep_value, seed, checkpoint_out);
        break;
      case DefenseKind::None:
        rec = run_none(config, seed, checkpoint_out);
        break;
    }
  } catch (const std::exception& e) {
    rec.error_stage += std::string(": ") + e.what();
  }
  rec.defense = to_string(config.kind);
  rec.sweep_key = config.sweep_key();
  rec.sweep_value = sweep_value;
  rec.seed = seed;
  rec.config = config_snapshot(config, sweep_value, seed);
  rec.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rec;
}

namespace {

std::string job_name(const ExperimentConfig& c, double sweep_value,
                     std::uint64_t seed) {
  std::ostringstream os;
  os << to_string(c.kind) << "_" << c.sweep_key() << sweep_value << "_s"
     << seed;
  return os.str();
}

}  // namespace

std::vector<ResultsRecord> run(const ExperimentConfig& config) {
  config.validate();
  const auto points = config.sweep_points();
  const std::vector<std::uint64_t> seeds =
      config.seeds.empty() ? std::vector<std::uint64_t>{config.game.seed}
                           : config.seeds;

  fs::create_directories(fs::path(config.out_dir) / "records");
  fs::create_directories(fs::path(config.out_dir) / "checkpoints");

  struct Job {
    double point;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double p : points)
    for (std::uint64_t s : seeds) jobs.push_back({p, s});

  std::vector<ResultsRecord> records(jobs.size());
  auto run_job = [&](std::size_t i) {
    Checkpoint ckpt;
    records[i] = run_single(config, jobs[i].point, jobs[i].seed, &ckpt);
    const std::string name = job_name(config, jobs[i].point, jobs[i].seed);
    records[i].save((fs::path(config.out_dir) / "records" / (name + ".json"))
                        .string());
    if (!ckpt.networks.empty())
      ckpt.save((fs::path(config.out_dir) / "checkpoints" / (name + ".ckpt"))
                    .string());
  };

  if (config.workers <= 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    const int nw = std::min<int>(config.workers, static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size();
             i = next.fetch_add(1))
          run_job(i);
      });
    for (auto& t : pool) t.join();
  }
  return records;
}

void export_representations(const Checkpoint& checkpoint, const Dataset& data,
                            const std::string& csv_path, std::uint64_t seed) {
  const Mlp& encoder = checkpoint.net("encoder");
  if (data.samples.empty()) throw EmptyDataset("export_representations: no samples");
  if (static_cast<int>(data.samples.front().features.size()) !=
      encoder.input_dim())
    throw DimensionMismatch("export_representations: dimension mismatch with checkpoint");
  std::ofstream out(csv_path);
  if (!out) throw Error("cannot write " + csv_path);
  const int m = encoder.output_dim();
  for (int i = 0; i < m; ++i) out << "r" << i << ",";
  out << "label,attribute\n";
  Rng noise(Rng::mix(seed, "noise"));
  char buf[64];
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    Vec r = encoder.forward(data.samples[i].features);
    if (checkpoint.perturbation) {
      const Vec delta = sample_perturbation(*checkpoint.perturbation, noise);
      for (int k = 0; k < m; ++k) r[k] += delta[k];
    }
    for (int k = 0; k < m; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", r[k]);
      out << buf << ",";
    }
    out << data.samples[i].label << ","
        << (i < data.attributes.size() ? data.attributes[i] : 0) << "\n";
  }
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void write_report(const std::vector<ResultsRecord>& records,
                  const std::string& out_dir) {
  if (records.empty()) throw EmptyDataset("write_report: no records");
  for (const auto& r : records)
    if (r.version != records.front().version)
      throw Error("write_report: incompatible record versions");
  fs::create_directories(out_dir);

  std::vector<const ResultsRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ResultsRecord* a, const ResultsRecord* b) {
                     if (a->defense != b->defense) return a->defense < b->defense;
                     if (a->sweep_value != b->sweep_value)
                       return a->sweep_value < b->sweep_value;
                     return a->seed < b->seed;
                   });

  std::ofstream csv(fs::path(out_dir) / "summary.csv");
  csv << "defense,sweep_key,sweep_value,seed,utility,attack_accuracy,"
         "substitute_accuracy,lira_tpr_at_0.01,mean_mse,mean_ssim,mean_psnr,"
         "leakage_bound_plug_in,tradeoff_lower,error_stage\n";
  for (const auto* r : sorted) {
    csv << r->defense << "," << r->sweep_key << "," << fmt(r->sweep_value)
        << "," << r->seed << "," << fmt(r->utility) << ",";
    csv << (r->attack ? fmt(r->attack->accuracy) : "") << ",";
    csv << (r->substitute_attack ? fmt(r->substitute_attack->accuracy) : "")
        << ",";
    if (r->lira && r->lira->tpr_at.count(0.01))
      csv << fmt(r->lira->tpr_at.at(0.01));
    csv << ",";
    csv << (r->recon ? fmt(r->recon->mean_mse) : "") << ",";
    csv << (r->recon && r->recon->has_image_metrics ? fmt(r->recon->mean_ssim)
                                                    : "")
        << ",";
    csv << (r->recon && r->recon->has_image_metrics ? fmt(r->recon->mean_psnr)
                                                    : "")
        << ",";
    csv << (r->bounds ? fmt(r->bounds->leakage_bound_plug_in) : "") << ",";
    csv << (r->bounds ? fmt(r->bounds->tradeoff_lower) : "") << ",";
    csv << r->error_stage << "\n";
  }
  csv.close();

  std::ofstream md(fs::path(out_dir) / "summary.md");
  std::string current;
  for (const auto* r : sorted) {
    if (r->defense != current) {
      current = r->defense;
      md << "\n## " << current << "\n\n";
      md << "| " << r->sweep_key
         << " | seed | utility | attack | substitute | mse | notes |\n";
      md << "|---|---|---|---|---|---|---|\n";
    }
    md << "| " << fmt(r->sweep_value) << " | " << r->seed << " | "
       << fmt(r->utility) << " | "
       << (r->attack ? fmt(r->attack->accuracy) : "-") << " | "
       << (r->substitute_attack ? fmt(r->substitute_attack->accuracy) : "-")
       << " | " << (r->recon ? fmt(r->recon->mean_mse) : "-") << " | "
       << (r->error_stage.empty() ? "ok" : r->error_stage) << " |\n";
  }
  md.close();

  for (const auto* r : sorted) {
    auto dump_roc = [&](const AttackReport& rep, const std::string& tag) {
      std::ostringstream name;
      name << "roc_" << r->defense << "_" << r->sweep_key << fmt(r->sweep_value)
           << "_s" << r->seed << "_" << tag << ".csv";
      std::ofstream rf(fs::path(out_dir) / name.str());
      rf << "fpr,tpr\n";
      for (const auto& [f, t] : rep.roc) rf << fmt(f) << "," << fmt(t) << "\n";
    };
    if (r->attack && !r->attack->roc.empty()) dump_roc(*r->attack, "attack");
    if (r->lira && !r->lira->roc.empty()) dump_roc(*r->lira, "lira");
  }
}

}  // namespace privrep
