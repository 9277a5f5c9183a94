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
#include "abrake/optimizers.hpp"
#include "abrake/param_vector.hpp"
#include "abrake/rng.hpp"

namespace abrake {

/// Quadratic L(w) = 1/2 sum_k lambda_k (Qw)_k^2 with gradient noise of
/// covariance H (in the eigenbasis). Without a rotation Q = I.
struct QuadraticProblem {
  std::vector<double> eigenvalues;
  std::optional<std::vector<double>> rotation;  // row-major N x N
  double noise_sigma = 0.0;
  ParamVector w0;
  double target_loss = 0.01;

  std::size_t dimension() const noexcept { return eigenvalues.size(); }
  /// Throws ConfigError on non-positive eigenvalues, bad sizes, a
  /// non-orthogonal rotation or a non-positive target.
  void validate() const;

  /// Unrotated problem starting from w0 = 1.
  static QuadraticProblem diagonal(std::vector<double> eigenvalues, double noise_sigma = 0.0,
                                   double target_loss = 0.01);
};

/// lambda_j = 1/j, j = 1..N
std::vector<double> make_inverse_spectrum(std::size_t n);

/// N values evenly spaced in log space, endpoints included exactly.
std::vector<double> make_loguniform_spectrum(std::size_t n, double lo, double hi);

/// Random orthogonal N x N matrix (row-major): QR of a Gaussian matrix with
/// the signs fixed so that R has a positive diagonal.
std::vector<double> random_rotation(std::size_t n, Rng& rng);

/// Noisy gradient at w. Draws N normals from rng only when sigma > 0.
void quadratic_gradient(const QuadraticProblem& problem, std::span<const double> w, Rng& rng,
                        std::span<double> out);
ParamVector quadratic_gradient(const QuadraticProblem& problem, std::span<const double> w,
                               Rng& rng);

double quadratic_loss(const QuadraticProblem& problem, std::span<const double> w);

struct EnergyBreakdown {
  double total = 0.0;
  double loss = 0.0;
  double kinetic = 0.0;
  /// 1/2 lambda_k w_k^2 + 1/2 eta v_k^2; empty for rotated problems.
  std::vector<double> components;
};

/// E = L(w) + 1/2 eta |v|^2
EnergyBreakdown energy(const QuadraticProblem& problem, std::span<const double> w,
                       std::span<const double> v, double eta);

class QuadraticOracle final : public GradientOracle {
 public:
  QuadraticOracle(const QuadraticProblem& problem, Rng rng);

  std::size_t dimension() const override { return problem_.dimension(); }
  void gradient(std::span<const double> weights, std::size_t step,
                std::span<double> out) override;
  double loss(std::span<const double> weights) const override;

 private:
  const QuadraticProblem& problem_;
  Rng rng_;
};

struct EnergyDecayResult {
  /// Geometric mean over steps of E_{t+1} / E^_{t+1} per component.
  std::vector<double> component_ratio;
  /// Steps skipped per component because either energy was zero.
  std::vector<std::size_t> excluded_count;
  /// Same ratio for the total energy.
  double total_ratio = 1.0;
  std::size_t total_excluded = 0;
  std::size_t steps = 0;
  RunStatus status = RunStatus::Completed;
};

/// Runs `config` for `steps` updates under `delay` and, at every state,
/// compares the next-state energy with that of one SGDM step taken from the
/// same state with the same gradient sample. Diagonal problems only; the
/// configured algorithm must keep a single shared velocity.
EnergyDecayResult relative_energy_decay(const QuadraticProblem& problem,
                                        const OptimizerConfig& config, const GroupSpec& groups,
                                        const DelayConfig& delay, std::size_t steps, Rng rng);

}  // namespace abrake
