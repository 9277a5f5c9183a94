// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "abrake/groups.hpp"
#include "abrake/metrics.hpp"
#include "abrake/optimizers.hpp"
#include "abrake/param_vector.hpp"

namespace abrake {

/// Source of (possibly stochastic) gradients and the loss used for stopping.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual std::size_t dimension() const = 0;
  /// Gradient at `weights` for master step `step` (0-based) written to `out`.
  virtual void gradient(std::span<const double> weights, std::size_t step,
                        std::span<double> out) = 0;
  /// Loss used for stop criteria and traces.
  virtual double loss(std::span<const double> weights) const = 0;
  virtual std::optional<double> accuracy(std::span<const double> /*weights*/) const {
    return std::nullopt;
  }
};

/// Constant delay D served by D+1 round-robin workers.
struct DelayConfig {
  std::size_t delay = 0;

  std::size_t num_workers() const noexcept { return delay + 1; }
};

/// Ring buffer of the last D+1 weight snapshots sent to workers. Before D
/// snapshots have been pushed the missing history reads as the initial weights.
class WeightHistory {
 public:
  WeightHistory(std::size_t delay, const ParamVector& initial);

  void push(const ParamVector& snapshot);
  /// Snapshot pushed k pushes ago (k = 0 is the newest); k <= delay.
  const ParamVector& at_offset(std::size_t k) const;
  const ParamVector& oldest() const { return at_offset(delay_); }
  std::size_t delay() const noexcept { return delay_; }

 private:
  std::size_t delay_;
  std::vector<ParamVector> slots_;
  std::size_t head_ = 0;
};

enum class RunStatus { Converged, Timeout, Diverged, Completed };

std::string_view to_string(RunStatus status) noexcept;

/// Learning-rate multiplier: linear warmup over the first warmup_steps, then
/// multiplied by `decay` at every boundary step reached.
struct LrSchedule {
  std::size_t warmup_steps = 0;
  std::vector<std::size_t> boundaries;
  double decay = 0.1;

  double factor(std::size_t step) const noexcept;

  friend bool operator==(const LrSchedule&, const LrSchedule&) = default;
};

struct TracePolicy {
  std::size_t every = 0;  // 0 records nothing
  bool groups = true;     // per-group alpha, norms, GVR and update alignment
  bool energy = false;    // loss + eta/2 |v|^2

  friend bool operator==(const TracePolicy&, const TracePolicy&) = default;
};

/// Full view of one master update, handed to RunOptions::observer.
struct StepRecord {
  std::size_t step = 0;  // 1-based update index
  std::size_t worker = 0;
  double lr = 0.0;
  std::span<const double> weights_before;
  std::span<const double> velocity_before;
  std::span<const double> gradient;
  std::span<const double> gradient_input;
  std::span<const double> weights_after;
  std::span<const double> velocity_after;
  const Optimizer* optimizer = nullptr;
};

struct RunOptions {
  std::size_t max_steps = 1;
  std::optional<double> target_loss;
  bool stop_at_target = true;
  /// Diverged once loss exceeds this multiple of the initial loss.
  double divergence_factor = 1e6;
  TracePolicy trace;
  LrSchedule schedule;
  /// Keep the loss after every step (index 0 = initial loss).
  bool record_losses = false;
  std::function<void(const StepRecord&)> observer;
};

struct RunResult {
  RunStatus status = RunStatus::Completed;
  std::optional<std::size_t> steps_to_target;
  std::optional<std::size_t> diverged_at;
  std::size_t steps_run = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  ParamVector final_weights;
  ParamVector final_velocity;
  std::vector<TraceRow> trace;
  std::vector<double> losses;
};

/// Simulated asynchronous training. Update t (1-based) comes from worker
/// t mod (D+1), whose gradient was computed on the weights sent D updates
/// earlier (the initial weights during warm-up, DANA's look-ahead weights for
/// DANA). Losses are evaluated on master weights. Non-finite values end the
/// run as Diverged.
RunResult run_async(GradientOracle& oracle, const OptimizerConfig& config,
                    const GroupSpec& groups, const DelayConfig& delay, const ParamVector& w0,
                    const RunOptions& options);

struct StopOutcome {
  RunStatus status = RunStatus::Timeout;
  std::optional<std::size_t> step;
};

/// First index t with losses[t] <= target (losses[0] is the initial loss).
/// Diverged if a non-finite loss, or one above divergence_factor * losses[0],
/// comes first; Timeout otherwise.
StopOutcome steps_to_target(std::span<const double> losses, double target,
                            double divergence_factor = 1e6);

}  // namespace abrake
