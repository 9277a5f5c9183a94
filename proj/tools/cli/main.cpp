// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

// abrake: delayed-gradient optimization experiments.
//
//   abrake <command> [--config FILE] [overrides...]
//
// Flags override the matching field of the config file.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "abrake/errors.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "errors.hpp"

namespace {

using abrake::cli::Json;

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta, momentum, rho, target_loss;
  std::optional<std::size_t> delay, micro_steps, max_steps, trace_every;
  std::optional<std::string> algorithm, grouping, algorithms;
};

Json load_config(const std::optional<std::string>& path) {
  if (!path) return Json::object();
  std::ifstream in(*path);
  if (!in) throw abrake::cli::IoError("cannot read config " + *path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw abrake::ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
}

Json& object_at(Json& doc, const char* key) {
  Json& j = doc[key];
  if (j.is_null()) j = Json::object();
  return j;
}

void apply_overrides(Json& doc, const Overrides& o) {
  if (!doc.is_object()) throw abrake::ConfigError("config: must be an object");
  if (o.seed) doc["seed"] = *o.seed;
  if (o.delay) doc["delay"] = *o.delay;
  if (o.max_steps) doc["max_steps"] = *o.max_steps;
  if (o.target_loss) doc["target_loss"] = *o.target_loss;
  if (o.grouping) doc["grouping"] = *o.grouping;
  if (o.trace_every) object_at(doc, "trace")["every"] = *o.trace_every;
  if (o.eta) object_at(doc, "optimizer")["eta"] = *o.eta;
  if (o.momentum) object_at(doc, "optimizer")["momentum"] = *o.momentum;
  if (o.rho) object_at(doc, "optimizer")["rho"] = *o.rho;
  if (o.micro_steps) object_at(doc, "optimizer")["micro_steps"] = *o.micro_steps;
  if (o.algorithm) object_at(doc, "optimizer")["algorithm"] = *o.algorithm;
  if (o.algorithms) {
    Json names = Json::array();
    std::stringstream ss(*o.algorithms);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) names.push_back(name);
    }
    object_at(doc, "ablate")["algorithms"] = names;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delayed-gradient optimization lab"};
  app.require_subcommand(1);

  Overrides o;
  abrake::cli::ExecutionOptions exec;
  std::string out_dir = ".";

  const std::map<std::string_view, std::string> about{
      {"run", "single run, writes trace.csv and summary.json"},
      {"train", "alias of run, meant for mlp problems"},
      {"sweep", "eta x momentum grid on an nqm problem, writes sweep.csv"},
      {"energy", "per-component energy decay against SGDM, writes energy.csv"},
      {"ablate", "same problem under several algorithms, writes ablate.csv"},
      {"dataset", "export the blob dataset to dataset.csv"}};

  for (std::string_view name : abrake::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(std::string(name), about.at(name));
    sub->add_option("--config", o.config_path, "JSON experiment config");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--parallelism", exec.parallelism, "worker threads (0: all cores)");
    sub->add_option("--eta", o.eta, "learning rate");
    sub->add_option("--momentum", o.momentum, "momentum coefficient");
    sub->add_option("--rho", o.rho, "braking coefficient");
    sub->add_option("--delay", o.delay, "gradient delay D");
    sub->add_option("--algorithm", o.algorithm, "optimizer algorithm");
    sub->add_option("--grouping", o.grouping, "global, tensor, filter or element");
    sub->add_option("--micro-steps", o.micro_steps, "micro-steps S");
    sub->add_option("--max-steps", o.max_steps, "step budget");
    sub->add_option("--target-loss", o.target_loss, "target loss");
    sub->add_option("--trace-every", o.trace_every, "trace cadence (0: off)");
    sub->add_option("--algorithms", o.algorithms, "comma-separated list for ablate");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return abrake::cli::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  exec.out_dir = out_dir;
  try {
    Json doc = load_config(o.config_path);
    apply_overrides(doc, o);
    const abrake::cli::ExperimentConfig config = abrake::cli::config_from_json(doc);
    abrake::cli::execute(command, config, exec, std::cout);
  } catch (const abrake::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return abrake::cli::kExitConfig;
  } catch (const abrake::cli::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return abrake::cli::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return abrake::cli::kExitOk;
}
