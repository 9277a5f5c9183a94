// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "abrake/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "abrake/errors.hpp"
#include "abrake/metrics.hpp"

namespace abrake {

void SweepGrid::validate() const {
  if (eta_values.empty()) throw ConfigError("eta_values: must not be empty");
  for (double eta : eta_values) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta_values: every eta must be > 0");
  }
  if (momentum_values.empty()) throw ConfigError("momentum_values: must not be empty");
  for (double m : momentum_values) {
    if (!(m >= 0.0 && m < 1.0)) throw ConfigError("momentum_values: each must lie in [0, 1)");
  }
  if (max_steps < 1) throw ConfigError("max_steps: must be >= 1");
  if (!(target > 0.0)) throw ConfigError("target: must be > 0");
  if (trials < 1) throw ConfigError("trials: must be >= 1");
}

namespace {

int status_rank(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::Converged: return 0;
    case RunStatus::Timeout: return 1;
    case RunStatus::Diverged: return 2;
    case RunStatus::Completed: return 1;
  }
  return 1;
}

}  // namespace

bool outcome_less(const TrialOutcome& a, const TrialOutcome& b) noexcept {
  const int ra = status_rank(a.status), rb = status_rank(b.status);
  if (ra != rb) return ra < rb;
  if (a.status == RunStatus::Converged) return a.steps.value_or(0) < b.steps.value_or(0);
  return false;
}

TrialOutcome median_outcome(std::vector<TrialOutcome> trials) {
  if (trials.empty()) throw ContractError("median_outcome: no trials");
  std::stable_sort(trials.begin(), trials.end(), outcome_less);
  return trials[(trials.size() - 1) / 2];
}

TrialOutcome run_cell_trial(const QuadraticProblem& problem, const OptimizerConfig& config,
                            const GroupSpec& groups, const DelayConfig& delay,
                            std::size_t max_steps, double target, Rng rng) {
  QuadraticOracle oracle(problem, rng);
  RunOptions options;
  options.max_steps = max_steps;
  options.target_loss = target;
  const RunResult run = run_async(oracle, config, groups, delay, problem.w0, options);
  TrialOutcome out;
  out.status = run.status;
  if (run.status == RunStatus::Converged) out.steps = run.steps_to_target;
  return out;
}

SweepResult run_sweep(const QuadraticProblem& problem, const OptimizerConfig& base,
                      const GroupSpec& groups, const DelayConfig& delay, const SweepGrid& grid,
                      std::uint64_t seed, std::size_t parallelism) {
  problem.validate();
  grid.validate();
  groups.require_covers(problem.dimension());

  const std::size_t n_m = grid.momentum_values.size();
  const std::size_t n_cells = grid.eta_values.size() * n_m;
  SweepResult result;
  result.cells.resize(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    OptimizerConfig cfg = base;
    cfg.eta = grid.eta_values[c / n_m];
    cfg.momentum = grid.momentum_values[c % n_m];
    cfg.validate();
  }

  const Rng master(seed);
  auto evaluate = [&](std::size_t c) {
    CellOutcome& cell = result.cells[c];
    cell.eta_index = c / n_m;
    cell.momentum_index = c % n_m;
    cell.eta = grid.eta_values[cell.eta_index];
    cell.momentum = grid.momentum_values[cell.momentum_index];
    OptimizerConfig cfg = base;
    cfg.eta = cell.eta;
    cfg.momentum = cell.momentum;
    const Rng cell_rng = master.substream(c);
    cell.trials.resize(grid.trials);
    for (std::size_t k = 0; k < grid.trials; ++k) {
      cell.trials[k] = run_cell_trial(problem, cfg, groups, delay, grid.max_steps, grid.target,
                                      cell_rng.substream(k));
    }
    cell.median = median_outcome(cell.trials);
  };

  std::size_t threads = parallelism == 0 ? std::thread::hardware_concurrency() : parallelism;
  threads = std::clamp<std::size_t>(threads, 1, n_cells);
  if (threads == 1) {
    for (std::size_t c = 0; c < n_cells; ++c) evaluate(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < n_cells; c = next++) {
          try {
            evaluate(c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  result.t_star = t_star(result);
  return result;
}

std::optional<double> t_star(const SweepResult& result, double p) {
  std::vector<double> finite;
  for (const auto& cell : result.cells) {
    if (cell.median.status == RunStatus::Converged && cell.median.steps) {
      finite.push_back(static_cast<double>(*cell.median.steps));
    }
  }
  if (finite.empty()) return std::nullopt;
  return percentile(std::move(finite), p);
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  return make_loguniform_spectrum(n, lo, hi);
}

}  // namespace abrake
