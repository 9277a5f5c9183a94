// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "abrake/groups.hpp"
#include "abrake/param_vector.hpp"

namespace abrake {

enum class Algorithm {
  SGDM,
  AB,
  AB_VelOnly,
  AB_WeightOnly,
  AB_MicroStep,
  SA,
  SM,
  DANA,
  DC,
};

std::string_view to_string(Algorithm algorithm) noexcept;
/// Case-insensitive; accepts the canonical names ("SGDM", "AB_VelOnly", ...).
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;
std::span<const Algorithm> all_algorithms() noexcept;

/// True for the algorithms that scale the gradient by a braking factor.
bool is_braking(Algorithm algorithm) noexcept;

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::SGDM;
  double eta = 0.01;
  double momentum = 0.0;
  double rho = 0.0;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  int micro_steps = 1;
  double dc_lambda0 = 2.0;
  double dc_theta = 0.95;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Mutable per-run optimizer state. Optional members are present only for the
/// algorithms that use them.
struct OptimizerState {
  ParamVector velocity;
  std::optional<std::vector<ParamVector>> worker_velocities;  // SM, DANA
  std::optional<ParamVector> dc_second_moment;                // DC
  std::optional<std::vector<std::size_t>> worker_iteration;   // SA
  std::size_t step = 0;

  static OptimizerState make(Algorithm algorithm, std::size_t dimension, std::size_t num_workers);
};

/// Per-group quantities from one update, all taken before the update is
/// applied (g_t and v_t).
struct StepDiagnostics {
  std::vector<double> alpha;
  std::vector<double> grad_norm;
  std::vector<double> vel_norm;
  std::vector<double> gvr;
};

/// alpha = 1 - rho * <g, v> / max(|g| |v|, epsilon) over `group`.
double compute_alpha(std::span<const double> g, std::span<const double> v, IndexRange group,
                     double rho, double epsilon);

/// v <- m v + g + lambda w ; w <- w - eta v
void sgdm_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
               const OptimizerConfig& cfg);

/// Per group: alpha from the raw gradient, then v <- m v + alpha g + lambda w,
/// w <- w - eta v.
StepDiagnostics ab_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
                        const OptimizerConfig& cfg, const GroupSpec& groups);

/// Braking applied to the stored velocity only; the weight step uses the
/// unscaled gradient.
StepDiagnostics ab_vel_only_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
                                 const OptimizerConfig& cfg, const GroupSpec& groups);

/// Stored velocity is the plain momentum velocity; only the applied weight
/// delta scales the gradient.
StepDiagnostics ab_weight_only_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
                                    const OptimizerConfig& cfg, const GroupSpec& groups);

/// Velocity update split into cfg.micro_steps sub-updates, each recomputing
/// alpha from the current velocity. Reported alpha is the mean over sub-steps.
StepDiagnostics ab_microstep(ParamVector& w, OptimizerState& state, const ParamVector& g,
                             const OptimizerConfig& cfg, const GroupSpec& groups);

/// Staleness-aware: w <- w - (eta / max(delay, 1)) v.
void sa_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
             const OptimizerConfig& cfg, std::size_t delay);

/// Shifted momentum: only worker `worker`'s velocity is updated and applied.
void sm_step(ParamVector& w, OptimizerState& state, std::size_t worker, const ParamVector& g,
             const OptimizerConfig& cfg);

/// base - eta * m * sum_j v_j
ParamVector dana_lookahead(std::span<const double> base,
                           const std::vector<ParamVector>& worker_velocities, double eta,
                           double momentum);

/// DANA master update; returns the look-ahead weights to send to the worker,
/// estimated from the updated master weights.
ParamVector dana_step(ParamVector& w, OptimizerState& state, std::size_t worker,
                      const ParamVector& g, const OptimizerConfig& cfg);

/// g + lambda * g * g * (w - stale_w), element-wise.
ParamVector dc_compensate(std::span<const double> g, std::span<const double> w,
                          std::span<const double> stale_w, std::span<const double> lambda);

/// Delay-compensated update. lambda_t = dc_lambda0 / (sqrt(M_t) + epsilon)
/// with M_t an exponential moving average of g * g (coefficient dc_theta).
void dc_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
             const OptimizerConfig& cfg, const ParamVector& stale_w);

/// Inputs to one master update beyond (w, g).
struct UpdateContext {
  std::size_t worker = 0;
  const ParamVector* stale_weights = nullptr;  // required by DC
  bool want_diagnostics = false;
};

/// Dispatches a master update to the configured algorithm and owns its state.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, GroupSpec groups, std::size_t num_workers);

  /// Applies one update to w. Diagnostics are always produced for braking
  /// algorithms and on request for the others (alpha reported as 1).
  std::optional<StepDiagnostics> apply(ParamVector& w, const ParamVector& g,
                                       const UpdateContext& ctx);

  /// Weights the master sends back to the worker after the last update.
  const ParamVector& outgoing_weights(const ParamVector& w) const;

  /// Velocity in effect for `worker` (the shared velocity unless SM/DANA).
  const ParamVector& velocity_for(std::size_t worker) const;
  /// Velocity touched by the most recent update.
  const ParamVector& last_velocity() const;

  void set_learning_rate(double eta) noexcept { config_.eta = eta; }
  const OptimizerConfig& config() const noexcept { return config_; }
  const GroupSpec& groups() const noexcept { return groups_; }
  const OptimizerState& state() const noexcept { return state_; }
  std::size_t num_workers() const noexcept { return num_workers_; }
  /// Staleness divisor used by the most recent SA update.
  std::size_t last_sa_divisor() const noexcept { return last_sa_divisor_; }

 private:
  StepDiagnostics plain_diagnostics(const ParamVector& g, const ParamVector& v) const;

  OptimizerConfig config_;
  GroupSpec groups_;
  std::size_t num_workers_;
  OptimizerState state_;
  std::optional<ParamVector> lookahead_;
  std::size_t last_worker_ = 0;
  std::size_t last_sa_divisor_ = 1;
};

}  // namespace abrake
