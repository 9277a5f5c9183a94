// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <string>

#include "abrake/errors.hpp"
#include "abrake/metrics.hpp"
#include "abrake/optimizers.hpp"

namespace abrake {

Optimizer::Optimizer(OptimizerConfig config, GroupSpec groups, std::size_t num_workers)
    : config_(config),
      groups_(std::move(groups)),
      num_workers_(num_workers),
      state_(OptimizerState::make(config.algorithm, groups_.parameter_count(), num_workers)) {
  config_.validate();
}

StepDiagnostics Optimizer::plain_diagnostics(const ParamVector& g, const ParamVector& v) const {
  StepDiagnostics d;
  for (const IndexRange& r : groups_.groups()) {
    const double g_norm = norm(g, r);
    const double v_norm = norm(v, r);
    d.alpha.push_back(1.0);
    d.grad_norm.push_back(g_norm);
    d.vel_norm.push_back(v_norm);
    d.gvr.push_back(gvr_from_norms(g_norm, v_norm));
  }
  return d;
}

std::optional<StepDiagnostics> Optimizer::apply(ParamVector& w, const ParamVector& g,
                                                const UpdateContext& ctx) {
  if (ctx.worker >= num_workers_) {
    throw ContractError("update from unknown worker " + std::to_string(ctx.worker));
  }
  last_worker_ = ctx.worker;
  std::optional<StepDiagnostics> diag;
  auto maybe_plain = [&](const ParamVector& v) {
    if (ctx.want_diagnostics) diag = plain_diagnostics(g, v);
  };

  switch (config_.algorithm) {
    case Algorithm::SGDM:
      maybe_plain(state_.velocity);
      sgdm_step(w, state_, g, config_);
      break;
    case Algorithm::AB:
      diag = ab_step(w, state_, g, config_, groups_);
      break;
    case Algorithm::AB_VelOnly:
      diag = ab_vel_only_step(w, state_, g, config_, groups_);
      break;
    case Algorithm::AB_WeightOnly:
      diag = ab_weight_only_step(w, state_, g, config_, groups_);
      break;
    case Algorithm::AB_MicroStep:
      diag = ab_microstep(w, state_, g, config_, groups_);
      break;
    case Algorithm::SA: {
      // Iteration-array bookkeeping: D_t = t - iter[j], then iter[j] = t.
      auto& iter = *state_.worker_iteration;
      const std::size_t t = state_.step + 1;
      const std::size_t delay = t - iter[ctx.worker];
      iter[ctx.worker] = t;
      last_sa_divisor_ = std::max<std::size_t>(delay, 1);
      maybe_plain(state_.velocity);
      sa_step(w, state_, g, config_, delay);
      break;
    }
    case Algorithm::SM:
      maybe_plain((*state_.worker_velocities)[ctx.worker]);
      sm_step(w, state_, ctx.worker, g, config_);
      break;
    case Algorithm::DANA:
      maybe_plain((*state_.worker_velocities)[ctx.worker]);
      lookahead_ = dana_step(w, state_, ctx.worker, g, config_);
      break;
    case Algorithm::DC:
      if (ctx.stale_weights == nullptr) {
        throw ContractError("DC update requires the stale weight snapshot");
      }
      maybe_plain(state_.velocity);
      dc_step(w, state_, g, config_, *ctx.stale_weights);
      break;
  }
  return diag;
}

const ParamVector& Optimizer::outgoing_weights(const ParamVector& w) const {
  if (config_.algorithm == Algorithm::DANA && lookahead_) return *lookahead_;
  return w;
}

const ParamVector& Optimizer::velocity_for(std::size_t worker) const {
  if (state_.worker_velocities) return state_.worker_velocities->at(worker);
  return state_.velocity;
}

const ParamVector& Optimizer::last_velocity() const { return velocity_for(last_worker_); }

}  // namespace abrake
