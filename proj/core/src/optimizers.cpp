// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "abrake/optimizers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>

#include "abrake/errors.hpp"
#include "abrake/metrics.hpp"

namespace abrake {

namespace {

constexpr std::array<Algorithm, 9> kAlgorithms = {
    Algorithm::SGDM, Algorithm::AB, Algorithm::AB_VelOnly, Algorithm::AB_WeightOnly,
    Algorithm::AB_MicroStep, Algorithm::SA, Algorithm::SM, Algorithm::DANA, Algorithm::DC,
};

bool iequals(std::string_view a, std::string_view b) noexcept {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

struct GroupMoments {
  double gv = 0.0;
  double gg = 0.0;
  double vv = 0.0;
};

GroupMoments moments(const ParamVector& g, const ParamVector& v, IndexRange r) noexcept {
  GroupMoments m;
  for (std::size_t k = r.begin; k < r.end; ++k) {
    m.gv += g[k] * v[k];
    m.gg += g[k] * g[k];
    m.vv += v[k] * v[k];
  }
  return m;
}

double alpha_from(double inner, double g_norm, double v_norm, double rho, double epsilon) noexcept {
  // Rounding can push |cos| a few ulps past 1.
  const double cos = std::clamp(inner / std::max(g_norm * v_norm, epsilon), -1.0, 1.0);
  return 1.0 - rho * cos;
}

void require_shapes(const ParamVector& w, const OptimizerState& state, const ParamVector& g) {
  require_same_size(w, g, "optimizer step (weights vs gradient)");
  require_same_size(w, state.velocity, "optimizer step (weights vs velocity)");
}

void record(StepDiagnostics& d, double alpha, double g_norm, double v_norm) {
  d.alpha.push_back(alpha);
  d.grad_norm.push_back(g_norm);
  d.vel_norm.push_back(v_norm);
  d.gvr.push_back(gvr_from_norms(g_norm, v_norm));
}

StepDiagnostics reserve_for(const GroupSpec& groups) {
  StepDiagnostics d;
  d.alpha.reserve(groups.size());
  d.grad_norm.reserve(groups.size());
  d.vel_norm.reserve(groups.size());
  d.gvr.reserve(groups.size());
  return d;
}

// The three single-alpha variants differ only in which of the velocity and
// the applied weight delta see the braked gradient.
enum class BrakeTarget { Both, VelocityOnly, WeightOnly };

template <BrakeTarget Target>
StepDiagnostics braked_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
                            const OptimizerConfig& cfg, const GroupSpec& groups) {
  require_shapes(w, state, g);
  groups.require_covers(w.size());
  ParamVector& v = state.velocity;
  const double m = cfg.momentum;
  const double eta = cfg.eta;
  const double wd = cfg.weight_decay;
  StepDiagnostics d = reserve_for(groups);
  for (const IndexRange& r : groups.groups()) {
    const GroupMoments mom = moments(g, v, r);
    const double g_norm = std::sqrt(mom.gg);
    const double v_norm = std::sqrt(mom.vv);
    const double alpha = alpha_from(mom.gv, g_norm, v_norm, cfg.rho, cfg.epsilon);
    record(d, alpha, g_norm, v_norm);
    for (std::size_t k = r.begin; k < r.end; ++k) {
      const double decay = wd * w[k];
      if constexpr (Target == BrakeTarget::Both) {
        v[k] = m * v[k] + alpha * g[k] + decay;
        w[k] = w[k] - eta * v[k];
      } else if constexpr (Target == BrakeTarget::VelocityOnly) {
        const double mv = m * v[k];
        v[k] = mv + alpha * g[k] + decay;
        w[k] = w[k] - eta * (mv + g[k] + decay);
      } else {
        const double mv = m * v[k];
        v[k] = mv + g[k] + decay;
        w[k] = w[k] - eta * (mv + alpha * g[k] + decay);
      }
    }
  }
  ++state.step;
  return d;
}

void momentum_update(ParamVector& v, const ParamVector& w, const ParamVector& g, double m,
                     double wd) noexcept {
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = m * v[k] + g[k] + wd * w[k];
}

}  // namespace

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::SGDM: return "SGDM";
    case Algorithm::AB: return "AB";
    case Algorithm::AB_VelOnly: return "AB_VelOnly";
    case Algorithm::AB_WeightOnly: return "AB_WeightOnly";
    case Algorithm::AB_MicroStep: return "AB_MicroStep";
    case Algorithm::SA: return "SA";
    case Algorithm::SM: return "SM";
    case Algorithm::DANA: return "DANA";
    case Algorithm::DC: return "DC";
  }
  return "SGDM";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  for (Algorithm a : kAlgorithms) {
    if (iequals(name, to_string(a))) return a;
  }
  return std::nullopt;
}

std::span<const Algorithm> all_algorithms() noexcept { return kAlgorithms; }

bool is_braking(Algorithm algorithm) noexcept {
  return algorithm == Algorithm::AB || algorithm == Algorithm::AB_VelOnly ||
         algorithm == Algorithm::AB_WeightOnly || algorithm == Algorithm::AB_MicroStep;
}

void OptimizerConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& rule, double got) {
    throw ConfigError(field + ": " + rule + " (got " + std::to_string(got) + ")");
  };
  if (!(eta > 0.0) || !std::isfinite(eta)) fail("eta", "must be a finite value > 0", eta);
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum", "must lie in [0, 1)", momentum);
  if (!(rho >= 0.0) || !std::isfinite(rho)) fail("rho", "must be >= 0", rho);
  if (!(epsilon > 0.0)) fail("epsilon", "must be > 0", epsilon);
  if (!(weight_decay >= 0.0)) fail("weight_decay", "must be >= 0", weight_decay);
  if (micro_steps < 1) fail("micro_steps", "must be >= 1", micro_steps);
  if (!(dc_lambda0 >= 0.0)) fail("dc_lambda0", "must be >= 0", dc_lambda0);
  if (!(dc_theta > 0.0 && dc_theta < 1.0)) fail("dc_theta", "must lie in (0, 1)", dc_theta);
}

OptimizerState OptimizerState::make(Algorithm algorithm, std::size_t dimension,
                                    std::size_t num_workers) {
  if (num_workers == 0) throw ContractError("optimizer state needs at least one worker");
  OptimizerState s;
  s.velocity = ParamVector(dimension);
  if (algorithm == Algorithm::SM || algorithm == Algorithm::DANA) {
    s.worker_velocities.emplace(num_workers, ParamVector(dimension));
  }
  if (algorithm == Algorithm::DC) s.dc_second_moment.emplace(dimension);
  if (algorithm == Algorithm::SA) s.worker_iteration.emplace(num_workers, 0);
  return s;
}

double compute_alpha(std::span<const double> g, std::span<const double> v, IndexRange group,
                     double rho, double epsilon) {
  if (group.empty()) throw ContractError("compute_alpha: empty group");
  return alpha_from(dot(g, v, group), norm(g, group), norm(v, group), rho, epsilon);
}

void sgdm_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
               const OptimizerConfig& cfg) {
  require_shapes(w, state, g);
  ParamVector& v = state.velocity;
  momentum_update(v, w, g, cfg.momentum, cfg.weight_decay);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = w[k] - cfg.eta * v[k];
  ++state.step;
}

StepDiagnostics ab_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
                        const OptimizerConfig& cfg, const GroupSpec& groups) {
  return braked_step<BrakeTarget::Both>(w, state, g, cfg, groups);
}

StepDiagnostics ab_vel_only_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
                                 const OptimizerConfig& cfg, const GroupSpec& groups) {
  return braked_step<BrakeTarget::VelocityOnly>(w, state, g, cfg, groups);
}

StepDiagnostics ab_weight_only_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
                                    const OptimizerConfig& cfg, const GroupSpec& groups) {
  return braked_step<BrakeTarget::WeightOnly>(w, state, g, cfg, groups);
}

StepDiagnostics ab_microstep(ParamVector& w, OptimizerState& state, const ParamVector& g,
                             const OptimizerConfig& cfg, const GroupSpec& groups) {
  if (cfg.micro_steps < 1) throw ConfigError("micro_steps: must be >= 1");
  require_shapes(w, state, g);
  groups.require_covers(w.size());
  ParamVector& v = state.velocity;
  const double m = cfg.momentum;
  const double steps = static_cast<double>(cfg.micro_steps);
  StepDiagnostics d = reserve_for(groups);
  for (const IndexRange& r : groups.groups()) {
    const GroupMoments start = moments(g, v, r);
    double g_sq = 0.0;
    for (std::size_t k = r.begin; k < r.end; ++k) g_sq += g[k] * g[k];
    const double g_norm = std::sqrt(g_sq);

    // After i sub-steps the velocity is m v + (sum of the first i alphas / S) g.
    double alpha_sum = 0.0;
    for (int i = 0; i < cfg.micro_steps; ++i) {
      const double c = alpha_sum / steps;
      double inner = 0.0;
      double v_sq = 0.0;
      for (std::size_t k = r.begin; k < r.end; ++k) {
        const double vk = m * v[k] + c * g[k];
        inner += g[k] * vk;
        v_sq += vk * vk;
      }
      alpha_sum += alpha_from(inner, g_norm, std::sqrt(v_sq), cfg.rho, cfg.epsilon);
    }
    const double c = alpha_sum / steps;
    record(d, c, g_norm, std::sqrt(start.vv));
    for (std::size_t k = r.begin; k < r.end; ++k) {
      v[k] = m * v[k] + c * g[k] + cfg.weight_decay * w[k];
      w[k] = w[k] - cfg.eta * v[k];
    }
  }
  ++state.step;
  return d;
}

void sa_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
             const OptimizerConfig& cfg, std::size_t delay) {
  require_shapes(w, state, g);
  ParamVector& v = state.velocity;
  momentum_update(v, w, g, cfg.momentum, cfg.weight_decay);
  const double lr = cfg.eta / static_cast<double>(std::max<std::size_t>(delay, 1));
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = w[k] - lr * v[k];
  ++state.step;
}

namespace {

ParamVector& worker_velocity(OptimizerState& state, std::size_t worker, const char* who) {
  if (!state.worker_velocities || worker >= state.worker_velocities->size()) {
    throw ContractError(std::string(who) + ": no velocity slot for worker " +
                        std::to_string(worker));
  }
  return (*state.worker_velocities)[worker];
}

}  // namespace

void sm_step(ParamVector& w, OptimizerState& state, std::size_t worker, const ParamVector& g,
             const OptimizerConfig& cfg) {
  ParamVector& v = worker_velocity(state, worker, "sm_step");
  require_same_size(w, g, "sm_step");
  require_same_size(w, v, "sm_step");
  momentum_update(v, w, g, cfg.momentum, cfg.weight_decay);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = w[k] - cfg.eta * v[k];
  ++state.step;
}

ParamVector dana_lookahead(std::span<const double> base,
                           const std::vector<ParamVector>& worker_velocities, double eta,
                           double momentum) {
  for (const auto& v : worker_velocities) require_same_size(base, v, "dana_lookahead");
  const double scale = eta * momentum;
  ParamVector out(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) {
    double sum = 0.0;
    for (const auto& v : worker_velocities) sum += v[k];
    out[k] = base[k] - scale * sum;
  }
  return out;
}

ParamVector dana_step(ParamVector& w, OptimizerState& state, std::size_t worker,
                      const ParamVector& g, const OptimizerConfig& cfg) {
  sm_step(w, state, worker, g, cfg);
  return dana_lookahead(w, *state.worker_velocities, cfg.eta, cfg.momentum);
}

ParamVector dc_compensate(std::span<const double> g, std::span<const double> w,
                          std::span<const double> stale_w, std::span<const double> lambda) {
  require_same_size(g, w, "dc_compensate");
  require_same_size(g, stale_w, "dc_compensate");
  require_same_size(g, lambda, "dc_compensate");
  ParamVector out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    out[k] = g[k] + lambda[k] * g[k] * g[k] * (w[k] - stale_w[k]);
  }
  return out;
}

void dc_step(ParamVector& w, OptimizerState& state, const ParamVector& g,
             const OptimizerConfig& cfg, const ParamVector& stale_w) {
  require_shapes(w, state, g);
  require_same_size(w, stale_w, "dc_step (stale weights)");
  if (!state.dc_second_moment) state.dc_second_moment.emplace(w.size());
  ParamVector& second = *state.dc_second_moment;
  ParamVector& v = state.velocity;
  const double theta = cfg.dc_theta;
  for (std::size_t k = 0; k < w.size(); ++k) {
    second[k] = theta * second[k] + (1.0 - theta) * g[k] * g[k];
    const double lambda = cfg.dc_lambda0 / (std::sqrt(second[k]) + cfg.epsilon);
    const double compensated = g[k] + lambda * g[k] * g[k] * (w[k] - stale_w[k]);
    v[k] = cfg.momentum * v[k] + compensated + cfg.weight_decay * w[k];
    w[k] = w[k] - cfg.eta * v[k];
  }
  ++state.step;
}

}  // namespace abrake
