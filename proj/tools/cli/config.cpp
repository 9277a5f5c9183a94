// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "abrake/errors.hpp"
#include "errors.hpp"

namespace abrake::cli {
namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

bool is_count(const Json& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

// Reads the members of one JSON object and rejects any key left unread.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) {
      throw ConfigError((path_.empty() ? std::string("config") : path_) + ": must be an object");
    }
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string where(const std::string& key) const { return join(path_, key); }

  std::optional<double> number(const std::string& key) {
    const Json* j = find(key);
    if (!j) return std::nullopt;
    if (!j->is_number()) throw ConfigError(where(key) + ": expected a number");
    return j->get<double>();
  }

  std::optional<std::uint64_t> unsigned_int(const std::string& key) {
    const Json* j = find(key);
    if (!j) return std::nullopt;
    if (!is_count(*j)) {
      throw ConfigError(where(key) + ": expected a non-negative integer");
    }
    return j->get<std::uint64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const Json* j = find(key);
    if (!j) return std::nullopt;
    if (!j->is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return j->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const Json* j = find(key);
    if (!j) return std::nullopt;
    if (!j->is_string()) throw ConfigError(where(key) + ": expected a string");
    return j->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const Json* j = find(key);
    if (!j) return std::nullopt;
    if (!j->is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const Json& x : *j) {
      if (!x.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::optional<std::vector<std::size_t>> sizes(const std::string& key) {
    const Json* j = find(key);
    if (!j) return std::nullopt;
    if (!j->is_array()) throw ConfigError(where(key) + ": expected an array of integers");
    std::vector<std::size_t> out;
    for (const Json& x : *j) {
      if (!is_count(x)) {
        throw ConfigError(where(key) + ": expected an array of non-negative integers");
      }
      out.push_back(x.get<std::size_t>());
    }
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

Algorithm algorithm_named(const std::string& name, const std::string& where) {
  if (auto a = parse_algorithm(name)) return *a;
  throw ConfigError(where + ": unknown algorithm '" + name + "' (valid: " +
                    valid_algorithm_names() + ")");
}

void read_nqm(ObjectReader& r, NqmConfig& c) {
  if (auto v = r.string("spectrum")) c.spectrum = *v;
  if (auto v = r.unsigned_int("dimension")) c.dimension = *v;
  if (auto v = r.number("lo")) c.lo = *v;
  if (auto v = r.number("hi")) c.hi = *v;
  if (auto v = r.numbers("eigenvalues")) c.eigenvalues = *v;
  if (auto v = r.number("noise_sigma")) c.noise_sigma = *v;
  if (const Json* w0 = r.find("w0")) {
    if (w0->is_number()) {
      c.w0.assign(1, w0->get<double>());
    } else {
      c.w0 = *r.numbers("w0");
    }
  }
  if (auto v = r.boolean("rotate")) c.rotate = *v;

  if (c.spectrum == "explicit") {
    if (c.eigenvalues.empty()) throw ConfigError(r.where("eigenvalues") + ": required for an explicit spectrum");
    c.dimension = c.eigenvalues.size();
  } else if (c.spectrum == "inverse" || c.spectrum == "loguniform") {
    if (!c.eigenvalues.empty()) {
      throw ConfigError(r.where("eigenvalues") + ": only allowed with spectrum \"explicit\"");
    }
    if (c.dimension < 1) throw ConfigError(r.where("dimension") + ": must be >= 1");
    if (c.spectrum == "loguniform" && !(c.lo > 0.0 && c.hi >= c.lo)) {
      throw ConfigError(r.where("lo") + ": need 0 < lo <= hi");
    }
  } else {
    throw ConfigError(r.where("spectrum") + ": expected inverse, loguniform or explicit");
  }
  for (double lambda : c.eigenvalues) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw ConfigError(r.where("eigenvalues") + ": every eigenvalue must be > 0");
    }
  }
  if (!(c.noise_sigma >= 0.0)) throw ConfigError(r.where("noise_sigma") + ": must be >= 0");
  if (c.w0.size() == 1 && c.dimension > 1) c.w0.assign(c.dimension, c.w0[0]);
  if (!c.w0.empty() && c.w0.size() != c.dimension) {
    throw ConfigError(r.where("w0") + ": length must equal the problem dimension");
  }
  if (c.rotate && c.dimension > 64) {
    throw ConfigError(r.where("rotate") + ": rotations are limited to dimension <= 64");
  }
}

void read_mlp(ObjectReader& r, MlpConfig& c) {
  if (auto v = r.sizes("layers")) c.layers = *v;
  if (auto v = r.unsigned_int("samples")) c.blobs.samples = *v;
  if (auto v = r.number("center_scale")) c.blobs.center_scale = *v;
  if (auto v = r.number("spread")) c.blobs.spread = *v;
  if (auto v = r.string("dataset")) c.dataset = *v;
  if (auto v = r.unsigned_int("batch_size")) c.batch_size = *v;
  MlpSpec spec{c.layers};
  try {
    spec.validate();
  } catch (const ConfigError&) {
    throw ConfigError(r.where("layers") + ": need at least two sizes, each >= 1");
  }
  c.blobs.features = c.layers.front();
  c.blobs.classes = c.layers.back();
  if (c.blobs.samples < 1) throw ConfigError(r.where("samples") + ": must be >= 1");
  if (c.batch_size < 1) throw ConfigError(r.where("batch_size") + ": must be >= 1");
  if (!c.dataset && c.batch_size > c.blobs.samples) {
    throw ConfigError(r.where("batch_size") + ": larger than the dataset");
  }
}

void read_optimizer(ObjectReader& r, OptimizerConfig& c) {
  if (auto v = r.string("algorithm")) c.algorithm = algorithm_named(*v, r.where("algorithm"));
  auto eta = r.number("eta");
  if (!eta) throw ConfigError(r.where("eta") + ": required (learning rate)");
  c.eta = *eta;
  if (auto v = r.number("momentum")) c.momentum = *v;
  if (auto v = r.number("rho")) c.rho = *v;
  if (auto v = r.number("epsilon")) c.epsilon = *v;
  if (auto v = r.number("weight_decay")) c.weight_decay = *v;
  if (auto v = r.unsigned_int("micro_steps")) c.micro_steps = static_cast<int>(*v);
  if (auto v = r.number("dc_lambda0")) c.dc_lambda0 = *v;
  if (auto v = r.number("dc_theta")) c.dc_theta = *v;
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(r.where(e.what()));
  }
}

void read_sweep(ObjectReader& r, SweepConfig& c) {
  if (const Json* eta = r.find("eta")) {
    if (eta->is_object()) {
      ObjectReader range(*eta, r.where("eta"));
      auto lo = range.number("lo");
      auto hi = range.number("hi");
      auto count = range.unsigned_int("count");
      range.finish();
      if (!lo || !hi || !count) throw ConfigError(r.where("eta") + ": range needs lo, hi and count");
      if (!(*lo > 0.0 && *hi >= *lo) || *count < 1) {
        throw ConfigError(r.where("eta") + ": need 0 < lo <= hi and count >= 1");
      }
      c.eta = make_loguniform_spectrum(*count, *lo, *hi);
    } else {
      c.eta = *r.numbers("eta");
    }
  }
  if (auto v = r.numbers("momentum")) c.momentum = *v;
  if (auto v = r.unsigned_int("trials")) c.trials = *v;
  for (double eta : c.eta) {
    if (!(eta > 0.0)) throw ConfigError(r.where("eta") + ": every value must be > 0");
  }
  for (double m : c.momentum) {
    if (!(m >= 0.0 && m < 1.0)) throw ConfigError(r.where("momentum") + ": values must lie in [0, 1)");
  }
  if (c.trials < 1) throw ConfigError(r.where("trials") + ": must be >= 1");
}

}  // namespace

std::string valid_algorithm_names() {
  std::string out;
  for (Algorithm a : all_algorithms()) {
    if (!out.empty()) out += ", ";
    out += to_string(a);
  }
  return out;
}

ExperimentConfig config_from_json(const Json& doc) {
  ExperimentConfig c;
  ObjectReader top(doc, "");

  if (const Json* problem = top.find("problem")) {
    ObjectReader r(*problem, "problem");
    const std::string kind = r.string("kind").value_or("nqm");
    if (kind == "nqm") {
      c.kind = ProblemKind::Nqm;
      read_nqm(r, c.nqm);
    } else if (kind == "mlp") {
      c.kind = ProblemKind::Mlp;
      read_mlp(r, c.mlp);
    } else {
      throw ConfigError("problem.kind: expected nqm or mlp");
    }
    r.finish();
  } else {
    const Json empty = Json::object();
    ObjectReader r(empty, "problem");
    read_nqm(r, c.nqm);
  }

  const Json* optimizer = top.find("optimizer");
  if (!optimizer) throw ConfigError("optimizer.eta: required (learning rate)");
  {
    ObjectReader r(*optimizer, "optimizer");
    read_optimizer(r, c.optimizer);
    r.finish();
  }

  if (auto v = top.string("grouping")) {
    auto mode = parse_group_mode(*v);
    if (!mode) throw ConfigError("grouping: expected global, tensor, filter or element");
    c.grouping = *mode;
  }
  if (c.kind == ProblemKind::Nqm &&
      (c.grouping == GroupMode::PerTensor || c.grouping == GroupMode::PerFilter)) {
    throw ConfigError("grouping: tensor and filter groups apply to mlp problems only");
  }
  if (auto v = top.unsigned_int("delay")) c.delay = *v;
  if (auto v = top.unsigned_int("max_steps")) c.max_steps = *v;
  if (c.max_steps < 1) throw ConfigError("max_steps: must be >= 1");
  if (auto v = top.number("target_loss")) {
    if (!(*v > 0.0)) throw ConfigError("target_loss: must be > 0");
    c.target_loss = *v;
  } else if (c.kind == ProblemKind::Nqm) {
    c.target_loss = 0.01;
  }
  if (auto v = top.unsigned_int("seed")) c.seed = *v;

  if (const Json* trace = top.find("trace")) {
    ObjectReader r(*trace, "trace");
    if (auto v = r.unsigned_int("every")) c.trace.every = *v;
    if (auto v = r.boolean("groups")) c.trace.groups = *v;
    if (auto v = r.boolean("energy")) c.trace.energy = *v;
    r.finish();
  }
  if (const Json* schedule = top.find("schedule")) {
    ObjectReader r(*schedule, "schedule");
    if (auto v = r.unsigned_int("warmup_steps")) c.schedule.warmup_steps = *v;
    if (auto v = r.sizes("boundaries")) c.schedule.boundaries = *v;
    if (auto v = r.number("decay")) c.schedule.decay = *v;
    r.finish();
    if (!(c.schedule.decay > 0.0)) throw ConfigError("schedule.decay: must be > 0");
  }
  if (const Json* sweep = top.find("sweep")) {
    ObjectReader r(*sweep, "sweep");
    read_sweep(r, c.sweep);
    r.finish();
  }
  c.ablate = {Algorithm::SGDM, Algorithm::AB, Algorithm::AB_VelOnly, Algorithm::AB_WeightOnly,
              Algorithm::SA,   Algorithm::SM, Algorithm::DANA,       Algorithm::DC};
  if (const Json* ablate = top.find("ablate")) {
    ObjectReader r(*ablate, "ablate");
    if (const Json* names = r.find("algorithms")) {
      if (!names->is_array() || names->empty()) {
        throw ConfigError("ablate.algorithms: expected a non-empty array of names");
      }
      c.ablate.clear();
      for (const Json& n : *names) {
        if (!n.is_string()) throw ConfigError("ablate.algorithms: expected algorithm names");
        c.ablate.push_back(algorithm_named(n.get<std::string>(), "ablate.algorithms"));
      }
    }
    r.finish();
  }
  top.finish();
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json doc = Json::object();
  Json problem = Json::object();
  if (c.kind == ProblemKind::Nqm) {
    problem["kind"] = "nqm";
    problem["spectrum"] = c.nqm.spectrum;
    if (c.nqm.spectrum == "explicit") {
      problem["eigenvalues"] = c.nqm.eigenvalues;
    } else {
      problem["dimension"] = c.nqm.dimension;
    }
    if (c.nqm.spectrum == "loguniform") {
      problem["lo"] = c.nqm.lo;
      problem["hi"] = c.nqm.hi;
    }
    problem["noise_sigma"] = c.nqm.noise_sigma;
    if (!c.nqm.w0.empty()) problem["w0"] = c.nqm.w0;
    problem["rotate"] = c.nqm.rotate;
  } else {
    problem["kind"] = "mlp";
    problem["layers"] = c.mlp.layers;
    problem["samples"] = c.mlp.blobs.samples;
    problem["center_scale"] = c.mlp.blobs.center_scale;
    problem["spread"] = c.mlp.blobs.spread;
    if (c.mlp.dataset) problem["dataset"] = *c.mlp.dataset;
    problem["batch_size"] = c.mlp.batch_size;
  }
  doc["problem"] = problem;

  const OptimizerConfig& o = c.optimizer;
  doc["optimizer"] = {{"algorithm", std::string(to_string(o.algorithm))},
                      {"eta", o.eta},
                      {"momentum", o.momentum},
                      {"rho", o.rho},
                      {"epsilon", o.epsilon},
                      {"weight_decay", o.weight_decay},
                      {"micro_steps", o.micro_steps},
                      {"dc_lambda0", o.dc_lambda0},
                      {"dc_theta", o.dc_theta}};
  doc["grouping"] = std::string(to_string(c.grouping));
  doc["delay"] = c.delay;
  doc["max_steps"] = c.max_steps;
  if (c.target_loss) doc["target_loss"] = *c.target_loss;
  doc["seed"] = c.seed;
  doc["trace"] = {{"every", c.trace.every}, {"groups", c.trace.groups}, {"energy", c.trace.energy}};
  doc["schedule"] = {{"warmup_steps", c.schedule.warmup_steps},
                     {"boundaries", c.schedule.boundaries},
                     {"decay", c.schedule.decay}};
  doc["sweep"] = {{"eta", c.sweep.eta}, {"momentum", c.sweep.momentum}, {"trials", c.sweep.trials}};
  Json names = Json::array();
  for (Algorithm a : c.ablate) names.push_back(std::string(to_string(a)));
  doc["ablate"] = {{"algorithms", names}};
  return doc;
}

std::string canonical_dump(const ExperimentConfig& config) { return to_json(config).dump(); }

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_dump(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

QuadraticProblem build_quadratic(const ExperimentConfig& config) {
  const NqmConfig& n = config.nqm;
  QuadraticProblem p;
  if (n.spectrum == "inverse") {
    p.eigenvalues = make_inverse_spectrum(n.dimension);
  } else if (n.spectrum == "loguniform") {
    p.eigenvalues = make_loguniform_spectrum(n.dimension, n.lo, n.hi);
  } else {
    p.eigenvalues = n.eigenvalues;
  }
  p.noise_sigma = n.noise_sigma;
  p.w0 = n.w0.empty() ? ParamVector(p.eigenvalues.size(), 1.0) : ParamVector(n.w0);
  p.target_loss = config.target_loss.value_or(0.01);
  if (n.rotate) {
    Rng rng = Rng(config.seed).substream(~std::uint64_t{0});
    p.rotation = random_rotation(p.eigenvalues.size(), rng);
  }
  p.validate();
  return p;
}

MlpSpec build_mlp_spec(const ExperimentConfig& config) {
  MlpSpec spec{config.mlp.layers};
  spec.validate();
  return spec;
}

SyntheticDataset build_dataset(const ExperimentConfig& config) {
  if (!config.mlp.dataset) return make_blobs(config.mlp.blobs, config.seed);
  std::ifstream in(*config.mlp.dataset);
  if (!in) throw IoError("cannot open dataset " + *config.mlp.dataset);
  SyntheticDataset data = read_dataset_csv(in);
  if (data.features != config.mlp.layers.front() || data.classes != config.mlp.layers.back()) {
    throw ConfigError("problem.dataset: shape does not match problem.layers");
  }
  if (config.mlp.batch_size > data.size()) {
    throw ConfigError("problem.batch_size: larger than the dataset");
  }
  return data;
}

}  // namespace abrake::cli
