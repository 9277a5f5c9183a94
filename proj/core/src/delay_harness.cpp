// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "abrake/delay_harness.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "abrake/errors.hpp"

namespace abrake {

WeightHistory::WeightHistory(std::size_t delay, const ParamVector& initial)
    : delay_(delay), slots_(delay + 1, initial) {}

void WeightHistory::push(const ParamVector& snapshot) {
  head_ = (head_ + 1) % slots_.size();
  slots_[head_] = snapshot;
}

const ParamVector& WeightHistory::at_offset(std::size_t k) const {
  if (k > delay_) throw ContractError("history offset beyond the configured delay");
  return slots_[(head_ + slots_.size() - k) % slots_.size()];
}

std::string_view to_string(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::Timeout: return "Timeout";
    case RunStatus::Diverged: return "Diverged";
    case RunStatus::Completed: return "Completed";
  }
  return "Completed";
}

double LrSchedule::factor(std::size_t step) const noexcept {
  double f = 1.0;
  if (step < warmup_steps) {
    f = static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  }
  for (std::size_t b : boundaries) {
    if (step >= b) f *= decay;
  }
  return f;
}

namespace {

double divergence_threshold(double initial_loss, double factor) noexcept {
  if (initial_loss > 0.0) return factor * initial_loss;
  return std::numeric_limits<double>::infinity();
}

bool diverged(double loss, double threshold) noexcept {
  return !std::isfinite(loss) || loss > threshold;
}

}  // namespace

RunResult run_async(GradientOracle& oracle, const OptimizerConfig& config,
                    const GroupSpec& groups, const DelayConfig& delay, const ParamVector& w0,
                    const RunOptions& options) {
  const std::size_t dim = oracle.dimension();
  require_same_size(w0, ParamVector(dim), "run_async initial weights");
  groups.require_covers(dim);
  if (options.max_steps < 1) throw ConfigError("max_steps: must be >= 1");

  Optimizer optimizer(config, groups, delay.num_workers());
  ParamVector w = w0;
  WeightHistory history(delay.delay, w0);
  RunResult result;

  auto evaluate = [&](const ParamVector& weights) {
    try {
      return oracle.loss(weights);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  result.initial_loss = evaluate(w);
  result.final_loss = result.initial_loss;
  const double threshold = divergence_threshold(result.initial_loss, options.divergence_factor);
  if (options.record_losses) result.losses.push_back(result.initial_loss);

  auto finish = [&](RunStatus status) {
    result.status = status;
    result.final_weights = w;
    result.final_velocity = optimizer.last_velocity();
    return result;
  };

  if (!std::isfinite(result.initial_loss)) {
    result.diverged_at = 0;
    return finish(RunStatus::Diverged);
  }
  if (options.target_loss && result.initial_loss <= *options.target_loss) {
    result.steps_to_target = 0;
    if (options.stop_at_target) return finish(RunStatus::Converged);
  }

  ParamVector g(dim);
  ParamVector w_before, v_before;
  const std::size_t workers = delay.num_workers();
  bool loss_is_current = true;

  for (std::size_t s = 0; s < options.max_steps; ++s) {
    const std::size_t t = s + 1;
    const double lr = config.eta * options.schedule.factor(s);
    optimizer.set_learning_rate(lr);
    const std::size_t worker = t % workers;
    const ParamVector& stale = history.oldest();

    try {
      oracle.gradient(stale, s, g);
    } catch (const NumericalError&) {
      result.diverged_at = t;
      result.final_loss = std::numeric_limits<double>::quiet_NaN();
      return finish(RunStatus::Diverged);
    }

    const bool trace_due = options.trace.every > 0 && t % options.trace.every == 0;
    const bool want_groups = trace_due && options.trace.groups;
    if (options.observer) w_before = w;
    if (options.observer || want_groups) v_before = optimizer.velocity_for(worker);

    UpdateContext ctx;
    ctx.worker = worker;
    ctx.stale_weights = &stale;
    ctx.want_diagnostics = want_groups;
    std::optional<StepDiagnostics> diag = optimizer.apply(w, g, ctx);
    result.steps_run = t;

    if (options.observer) {
      StepRecord rec;
      rec.step = t;
      rec.worker = worker;
      rec.lr = lr;
      rec.weights_before = w_before;
      rec.velocity_before = v_before;
      rec.gradient = g;
      rec.gradient_input = stale;
      rec.weights_after = w;
      rec.velocity_after = optimizer.last_velocity();
      rec.optimizer = &optimizer;
      options.observer(rec);
    }

    // Overwrites the slot `stale` refers to.
    history.push(optimizer.outgoing_weights(w));

    const bool need_loss = options.target_loss.has_value() || trace_due ||
                           options.record_losses || t == options.max_steps;
    double loss = std::numeric_limits<double>::quiet_NaN();
    if (need_loss) {
      loss = evaluate(w);
      result.final_loss = loss;
      loss_is_current = true;
      if (options.record_losses) result.losses.push_back(loss);
      if (diverged(loss, threshold)) {
        result.diverged_at = t;
        return finish(RunStatus::Diverged);
      }
    } else {
      loss_is_current = false;
      if (!all_finite(w)) {
        result.diverged_at = t;
        result.final_loss = std::numeric_limits<double>::quiet_NaN();
        return finish(RunStatus::Diverged);
      }
    }

    if (trace_due) {
      TraceRow row;
      row.step = t;
      row.lr = lr;
      row.loss = loss;
      row.accuracy = oracle.accuracy(w);
      if (options.trace.energy) {
        const double v_norm = norm(optimizer.last_velocity());
        row.energy = loss + 0.5 * lr * v_norm * v_norm;
      }
      if (diag && options.trace.groups) {
        row.alpha = diag->alpha;
        row.grad_norm = diag->grad_norm;
        row.vel_norm = diag->vel_norm;
        row.gvr = diag->gvr;
        try {
          row.update_alignment =
              update_alignment(g, v_before, row.alpha, config.momentum, groups);
        } catch (const ContractError&) {
          row.update_alignment.reset();
        }
      }
      result.trace.push_back(std::move(row));
    }

    if (options.target_loss && !result.steps_to_target && loss <= *options.target_loss) {
      result.steps_to_target = t;
      if (options.stop_at_target) return finish(RunStatus::Converged);
    }
  }

  if (!loss_is_current) result.final_loss = evaluate(w);
  if (options.target_loss) {
    return finish(result.steps_to_target ? RunStatus::Converged : RunStatus::Timeout);
  }
  return finish(RunStatus::Completed);
}

StopOutcome steps_to_target(std::span<const double> losses, double target,
                            double divergence_factor) {
  if (losses.empty()) throw ContractError("steps_to_target: empty loss series");
  const double threshold = divergence_threshold(losses[0], divergence_factor);
  for (std::size_t t = 0; t < losses.size(); ++t) {
    if (diverged(losses[t], threshold)) return {RunStatus::Diverged, t};
    if (losses[t] <= target) return {RunStatus::Converged, t};
  }
  return {RunStatus::Timeout, std::nullopt};
}

}  // namespace abrake
