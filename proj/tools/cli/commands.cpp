// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <array>
#include <ostream>
#include <sstream>

#include "abrake/errors.hpp"
#include "abrake/format.hpp"
#include "abrake/mlp.hpp"
#include "abrake/nqm.hpp"
#include "abrake/sweep.hpp"
#include "output.hpp"

namespace abrake::cli {
namespace {

constexpr std::array<std::string_view, 6> kCommands{"run",    "train",  "sweep",
                                                    "energy", "ablate", "dataset"};

// Noise stream of a single run: identical to trial 0 of sweep cell 0.
Rng run_rng(const ExperimentConfig& config) {
  return Rng(config.seed).substream(0).substream(0);
}

GroupSpec nqm_groups(const ExperimentConfig& config, std::size_t n) {
  return config.grouping == GroupMode::PerElement ? GroupSpec::per_element(n)
                                                  : GroupSpec::global(n);
}

RunOptions run_options(const ExperimentConfig& config) {
  RunOptions o;
  o.max_steps = config.max_steps;
  o.target_loss = config.target_loss;
  o.trace = config.trace;
  o.schedule = config.schedule;
  return o;
}

void require_kind(const ExperimentConfig& config, ProblemKind kind, std::string_view command) {
  if (config.kind != kind) {
    throw ConfigError("problem.kind: '" + std::string(command) + "' needs a" +
                      (kind == ProblemKind::Nqm ? "n nqm" : " mlp") + " problem");
  }
}

Json optional_json(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(); }

Json finite_json(double v) { return std::isfinite(v) ? Json(v) : Json(); }

struct Outcome {
  RunResult result;
  std::size_t groups = 0;
};

Outcome single_run(const ExperimentConfig& config, RunOptions options) {
  const DelayConfig delay{config.delay};
  if (config.kind == ProblemKind::Nqm) {
    const QuadraticProblem problem = build_quadratic(config);
    const GroupSpec groups = nqm_groups(config, problem.dimension());
    QuadraticOracle oracle(problem, run_rng(config));
    return {run_async(oracle, config.optimizer, groups, delay, problem.w0, options), groups.size()};
  }
  const MlpSpec spec = build_mlp_spec(config);
  const SyntheticDataset data = build_dataset(config);
  TrainOptions train_options;
  train_options.batch_size = config.mlp.batch_size;
  train_options.seed = config.seed;
  train_options.run = std::move(options);
  return {train(spec, data, config.optimizer, config.grouping, delay, train_options),
          build_groups(spec, config.grouping).size()};
}

void cmd_run(std::string_view name, const ExperimentConfig& config,
             const ExecutionOptions& exec, std::ostream& log) {
  const Provenance prov = make_provenance(std::string(name), config);
  const Outcome out = single_run(config, run_options(config));
  const RunResult& r = out.result;

  std::ostringstream trace;
  write_header(trace, prov);
  write_trace_csv(trace, r.trace, out.groups, config.trace.groups);
  write_file(exec.out_dir / "trace.csv", trace.str());

  Json summary = {{"provenance", provenance_json(prov)},
                  {"status", std::string(to_string(r.status))},
                  {"steps_to_target", optional_json(r.steps_to_target)},
                  {"diverged_at", optional_json(r.diverged_at)},
                  {"steps_run", r.steps_run},
                  {"initial_loss", finite_json(r.initial_loss)},
                  {"final_loss", finite_json(r.final_loss)}};
  write_file(exec.out_dir / "summary.json", summary.dump(2) + "\n");
  log << to_string(r.status) << " after " << r.steps_run << " steps, final loss "
      << format_double(r.final_loss) << '\n';
}

void cmd_sweep(const ExperimentConfig& config, const ExecutionOptions& exec, std::ostream& log) {
  require_kind(config, ProblemKind::Nqm, "sweep");
  if (config.sweep.eta.empty()) throw ConfigError("sweep.eta: required for a sweep");
  if (config.sweep.momentum.empty()) throw ConfigError("sweep.momentum: required for a sweep");
  const Provenance prov = make_provenance("sweep", config);
  const QuadraticProblem problem = build_quadratic(config);

  SweepGrid grid;
  grid.eta_values = config.sweep.eta;
  grid.momentum_values = config.sweep.momentum;
  grid.max_steps = config.max_steps;
  grid.target = problem.target_loss;
  grid.trials = config.sweep.trials;
  const SweepResult result =
      run_sweep(problem, config.optimizer, nqm_groups(config, problem.dimension()),
                DelayConfig{config.delay}, grid, config.seed, exec.parallelism);

  std::ostringstream csv;
  write_header(csv, prov);
  csv << "eta,momentum,trial,status,T\n";
  Json cells = Json::array();
  for (const CellOutcome& cell : result.cells) {
    for (std::size_t k = 0; k < cell.trials.size(); ++k) {
      const TrialOutcome& t = cell.trials[k];
      csv << format_double(cell.eta) << ',' << format_double(cell.momentum) << ',' << k << ','
          << to_string(t.status) << ',' << (t.steps ? std::to_string(*t.steps) : "") << '\n';
    }
    cells.push_back({{"eta", cell.eta},
                     {"momentum", cell.momentum},
                     {"status", std::string(to_string(cell.median.status))},
                     {"T", optional_json(cell.median.steps)}});
  }
  write_file(exec.out_dir / "sweep.csv", csv.str());

  Json summary = {{"provenance", provenance_json(prov)},
                  {"t_star", result.t_star ? Json(*result.t_star) : Json()},
                  {"cells", cells}};
  write_file(exec.out_dir / "summary.json", summary.dump(2) + "\n");
  log << result.cells.size() << " cells, t_star "
      << (result.t_star ? format_double(*result.t_star) : std::string("absent")) << '\n';
}

void cmd_energy(const ExperimentConfig& config, const ExecutionOptions& exec, std::ostream& log) {
  require_kind(config, ProblemKind::Nqm, "energy");
  if (config.nqm.rotate) throw ConfigError("problem.rotate: energy needs an unrotated problem");
  if (config.optimizer.algorithm == Algorithm::SM || config.optimizer.algorithm == Algorithm::DANA) {
    throw ConfigError("optimizer.algorithm: energy needs a shared-velocity algorithm");
  }
  const Provenance prov = make_provenance("energy", config);
  const QuadraticProblem problem = build_quadratic(config);
  const EnergyDecayResult r = relative_energy_decay(
      problem, config.optimizer, nqm_groups(config, problem.dimension()),
      DelayConfig{config.delay}, config.max_steps, run_rng(config));

  std::ostringstream csv;
  write_header(csv, prov);
  csv << "component_index,eigenvalue,geomean_ratio,excluded_count\n";
  for (std::size_t k = 0; k < r.component_ratio.size(); ++k) {
    csv << k << ',' << format_double(problem.eigenvalues[k]) << ','
        << format_double(r.component_ratio[k]) << ',' << r.excluded_count[k] << '\n';
  }
  write_file(exec.out_dir / "energy.csv", csv.str());

  Json summary = {{"provenance", provenance_json(prov)},
                  {"status", std::string(to_string(r.status))},
                  {"steps", r.steps},
                  {"total_ratio", finite_json(r.total_ratio)},
                  {"total_excluded", r.total_excluded}};
  write_file(exec.out_dir / "summary.json", summary.dump(2) + "\n");
  log << "total energy ratio " << format_double(r.total_ratio) << " over " << r.steps
      << " steps\n";
}

void cmd_ablate(const ExperimentConfig& config, const ExecutionOptions& exec, std::ostream& log) {
  const Provenance prov = make_provenance("ablate", config);
  std::ostringstream csv;
  write_header(csv, prov);
  csv << "algorithm,step,loss,status\n";
  Json runs = Json::array();
  for (Algorithm a : config.ablate) {
    ExperimentConfig c = config;
    c.optimizer.algorithm = a;
    RunOptions options = run_options(c);
    options.trace = TracePolicy{0, false, false};
    options.record_losses = true;
    options.stop_at_target = false;
    const RunResult r = single_run(c, std::move(options)).result;
    const std::string name(to_string(a));
    const std::string status(to_string(r.status));
    for (std::size_t t = 0; t <= config.max_steps; ++t) {
      const double loss =
          t < r.losses.size() ? r.losses[t] : std::numeric_limits<double>::quiet_NaN();
      csv << name << ',' << t << ',' << format_double(loss) << ',' << status << '\n';
    }
    runs.push_back({{"algorithm", name},
                    {"status", status},
                    {"steps_to_target", optional_json(r.steps_to_target)},
                    {"diverged_at", optional_json(r.diverged_at)},
                    {"final_loss", finite_json(r.final_loss)}});
    log << name << ": " << status << '\n';
  }
  write_file(exec.out_dir / "ablate.csv", csv.str());
  Json summary = {{"provenance", provenance_json(prov)}, {"runs", runs}};
  write_file(exec.out_dir / "summary.json", summary.dump(2) + "\n");
}

void cmd_dataset(const ExperimentConfig& config, const ExecutionOptions& exec, std::ostream& log) {
  require_kind(config, ProblemKind::Mlp, "dataset");
  const Provenance prov = make_provenance("dataset", config);
  const SyntheticDataset data = build_dataset(config);
  std::ostringstream csv;
  write_header(csv, prov);
  write_dataset_csv(data, csv);
  write_file(exec.out_dir / "dataset.csv", csv.str());
  log << data.size() << " samples\n";
}

}  // namespace

std::span<const std::string_view> command_names() noexcept { return kCommands; }

void execute(std::string_view command, const ExperimentConfig& config,
             const ExecutionOptions& options, std::ostream& log) {
  if (command == "run") {
    cmd_run(command, config, options, log);
  } else if (command == "train") {
    require_kind(config, ProblemKind::Mlp, "train");
    cmd_run(command, config, options, log);
  } else if (command == "sweep") {
    cmd_sweep(config, options, log);
  } else if (command == "energy") {
    cmd_energy(config, options, log);
  } else if (command == "ablate") {
    cmd_ablate(config, options, log);
  } else if (command == "dataset") {
    cmd_dataset(config, options, log);
  } else {
    throw ConfigError("command: unknown '" + std::string(command) + "'");
  }
}

}  // namespace abrake::cli
