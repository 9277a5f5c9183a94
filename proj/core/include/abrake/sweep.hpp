// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "abrake/delay_harness.hpp"
#include "abrake/groups.hpp"
#include "abrake/nqm.hpp"
#include "abrake/optimizers.hpp"

namespace abrake {

struct SweepGrid {
  std::vector<double> eta_values;
  std::vector<double> momentum_values;
  std::size_t max_steps = 500000;
  double target = 0.01;
  std::size_t trials = 1;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

struct TrialOutcome {
  RunStatus status = RunStatus::Timeout;  // Converged, Timeout or Diverged
  std::optional<std::size_t> steps;       // T when Converged

  friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

/// Orders finite T ascending, then Timeout, then Diverged.
bool outcome_less(const TrialOutcome& a, const TrialOutcome& b) noexcept;
/// Lower median under outcome_less.
TrialOutcome median_outcome(std::vector<TrialOutcome> trials);

struct CellOutcome {
  std::size_t eta_index = 0;
  std::size_t momentum_index = 0;
  double eta = 0.0;
  double momentum = 0.0;
  std::vector<TrialOutcome> trials;
  TrialOutcome median;

  friend bool operator==(const CellOutcome&, const CellOutcome&) = default;
};

struct SweepResult {
  /// Cell (i, j) lives at i * momentum_values.size() + j.
  std::vector<CellOutcome> cells;
  std::optional<double> t_star;
};

/// Evaluates every (eta, momentum) cell of the grid on `problem`. Trial k of
/// cell c draws its gradient noise from Rng(seed).substream(c).substream(k).
/// parallelism 0 uses all hardware threads; results do not depend on it.
SweepResult run_sweep(const QuadraticProblem& problem, const OptimizerConfig& base,
                      const GroupSpec& groups, const DelayConfig& delay, const SweepGrid& grid,
                      std::uint64_t seed, std::size_t parallelism = 1);

/// One trial of one cell, as run by run_sweep.
TrialOutcome run_cell_trial(const QuadraticProblem& problem, const OptimizerConfig& config,
                            const GroupSpec& groups, const DelayConfig& delay,
                            std::size_t max_steps, double target, Rng rng);

/// 1st percentile of the finite median T values; absent when there are none.
std::optional<double> t_star(const SweepResult& result, double p = 1.0);

/// n values from lo to hi evenly spaced in log space, endpoints exact.
std::vector<double> log_space(double lo, double hi, std::size_t n);

}  // namespace abrake
