// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "abrake/nqm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "abrake/errors.hpp"

namespace abrake {

void QuadraticProblem::validate() const {
  const std::size_t n = eigenvalues.size();
  if (n == 0) throw ConfigError("eigenvalues: must not be empty");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(eigenvalues[k] > 0.0) || !std::isfinite(eigenvalues[k])) {
      throw ConfigError("eigenvalues: entry " + std::to_string(k) + " is not a finite value > 0");
    }
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("noise_sigma: must be a finite value >= 0");
  }
  if (w0.size() != n) throw ConfigError("w0: length must match the number of eigenvalues");
  if (!all_finite(w0)) throw ConfigError("w0: must be finite");
  if (!(target_loss > 0.0)) throw ConfigError("target_loss: must be > 0");
  if (rotation) {
    if (rotation->size() != n * n) throw ConfigError("rotation: must be N x N");
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> q(
        rotation->data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Eigen::MatrixXd defect =
        q.transpose() * q - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                      static_cast<Eigen::Index>(n));
    if (defect.cwiseAbs().maxCoeff() >= 1e-10) throw ConfigError("rotation: not orthogonal");
  }
}

QuadraticProblem QuadraticProblem::diagonal(std::vector<double> eigenvalues, double noise_sigma,
                                            double target_loss) {
  QuadraticProblem p;
  p.w0 = ParamVector(eigenvalues.size(), 1.0);
  p.eigenvalues = std::move(eigenvalues);
  p.noise_sigma = noise_sigma;
  p.target_loss = target_loss;
  return p;
}

std::vector<double> make_inverse_spectrum(std::size_t n) {
  if (n < 1) throw ContractError("make_inverse_spectrum: N must be >= 1");
  std::vector<double> out(n);
  for (std::size_t j = 1; j <= n; ++j) out[j - 1] = 1.0 / static_cast<double>(j);
  return out;
}

std::vector<double> make_loguniform_spectrum(std::size_t n, double lo, double hi) {
  if (n < 1) throw ContractError("make_loguniform_spectrum: N must be >= 1");
  if (!(lo > 0.0) || !(hi >= lo)) throw ContractError("make_loguniform_spectrum: need 0 < lo <= hi");
  std::vector<double> out(n);
  out[0] = lo;
  if (n == 1) return out;
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / static_cast<double>(n - 1);
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = std::exp(log_lo + step * static_cast<double>(j));
  out[n - 1] = hi;
  return out;
}

std::vector<double> random_rotation(std::size_t n, Rng& rng) {
  if (n < 1) throw ContractError("random_rotation: N must be >= 1");
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = rng.next_normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  std::vector<double> out(n * n);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) out[static_cast<std::size_t>(i) * n + j] = q(i, j);
  }
  return out;
}

namespace {

void require_dimension(const QuadraticProblem& problem, std::size_t size, const char* what) {
  if (size != problem.dimension()) {
    throw ContractError(std::string(what) + ": dimension mismatch");
  }
}

// y = Q x
void rotate(const std::vector<double>& q, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* row = q.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

// y = Q^T x
void rotate_back(const std::vector<double>& q, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = q.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) y[j] += row[j] * x[i];
  }
}

}  // namespace

void quadratic_gradient(const QuadraticProblem& problem, std::span<const double> w, Rng& rng,
                        std::span<double> out) {
  require_dimension(problem, w.size(), "quadratic_gradient");
  require_dimension(problem, out.size(), "quadratic_gradient");
  const std::size_t n = w.size();
  const auto& lambda = problem.eigenvalues;
  const double sigma = problem.noise_sigma;

  if (!problem.rotation) {
    if (sigma == 0.0) {
      for (std::size_t k = 0; k < n; ++k) out[k] = lambda[k] * w[k];
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        out[k] = lambda[k] * w[k] + sigma * std::sqrt(lambda[k]) * rng.next_normal();
      }
    }
    return;
  }

  std::vector<double> u(n), h(n);
  rotate(*problem.rotation, w, u);
  for (std::size_t k = 0; k < n; ++k) {
    h[k] = lambda[k] * u[k];
    if (sigma != 0.0) h[k] += sigma * std::sqrt(lambda[k]) * rng.next_normal();
  }
  rotate_back(*problem.rotation, h, out);
}

ParamVector quadratic_gradient(const QuadraticProblem& problem, std::span<const double> w,
                               Rng& rng) {
  ParamVector g(w.size());
  quadratic_gradient(problem, w, rng, g);
  return g;
}

double quadratic_loss(const QuadraticProblem& problem, std::span<const double> w) {
  require_dimension(problem, w.size(), "quadratic_loss");
  const auto& lambda = problem.eigenvalues;
  double s = 0.0;
  if (!problem.rotation) {
    for (std::size_t k = 0; k < w.size(); ++k) s += lambda[k] * w[k] * w[k];
    return 0.5 * s;
  }
  std::vector<double> u(w.size());
  rotate(*problem.rotation, w, u);
  for (std::size_t k = 0; k < u.size(); ++k) s += lambda[k] * u[k] * u[k];
  return 0.5 * s;
}

EnergyBreakdown energy(const QuadraticProblem& problem, std::span<const double> w,
                       std::span<const double> v, double eta) {
  if (!(eta > 0.0)) throw ContractError("energy: eta must be > 0");
  require_dimension(problem, w.size(), "energy");
  require_dimension(problem, v.size(), "energy");
  EnergyBreakdown e;
  e.loss = quadratic_loss(problem, w);
  double vv = 0.0;
  for (double x : v) vv += x * x;
  e.kinetic = 0.5 * eta * vv;
  e.total = e.loss + e.kinetic;
  if (!problem.rotation) {
    e.components.resize(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
      e.components[k] = 0.5 * problem.eigenvalues[k] * w[k] * w[k] + 0.5 * eta * v[k] * v[k];
    }
  }
  return e;
}

QuadraticOracle::QuadraticOracle(const QuadraticProblem& problem, Rng rng)
    : problem_(problem), rng_(rng) {}

void QuadraticOracle::gradient(std::span<const double> weights, std::size_t /*step*/,
                               std::span<double> out) {
  quadratic_gradient(problem_, weights, rng_, out);
}

double QuadraticOracle::loss(std::span<const double> weights) const {
  return quadratic_loss(problem_, weights);
}

EnergyDecayResult relative_energy_decay(const QuadraticProblem& problem,
                                        const OptimizerConfig& config, const GroupSpec& groups,
                                        const DelayConfig& delay, std::size_t steps, Rng rng) {
  problem.validate();
  if (problem.rotation) throw ContractError("relative_energy_decay: diagonal problems only");
  if (config.algorithm == Algorithm::SM || config.algorithm == Algorithm::DANA) {
    throw ContractError("relative_energy_decay: algorithm must use a shared velocity");
  }
  if (steps < 1) throw ContractError("relative_energy_decay: steps must be >= 1");

  const std::size_t n = problem.dimension();
  const auto& lambda = problem.eigenvalues;
  std::vector<double> log_sum(n, 0.0);
  std::vector<std::size_t> counted(n, 0);
  EnergyDecayResult result;
  result.excluded_count.assign(n, 0);
  double total_log_sum = 0.0;
  std::size_t total_counted = 0;

  RunOptions options;
  options.max_steps = steps;
  options.observer = [&](const StepRecord& rec) {
    const double eta = rec.lr;
    const double m = config.momentum;
    const double wd = config.weight_decay;
    double e_total = 0.0, h_total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double w = rec.weights_after[k];
      const double v = rec.velocity_after[k];
      const double v_hat = m * rec.velocity_before[k] + rec.gradient[k] + wd * rec.weights_before[k];
      const double w_hat = rec.weights_before[k] - eta * v_hat;
      const double e = 0.5 * lambda[k] * w * w + 0.5 * eta * v * v;
      const double e_hat = 0.5 * lambda[k] * w_hat * w_hat + 0.5 * eta * v_hat * v_hat;
      e_total += e;
      h_total += e_hat;
      if (e_hat > 0.0 && e > 0.0 && std::isfinite(e) && std::isfinite(e_hat)) {
        log_sum[k] += std::log(e / e_hat);
        ++counted[k];
      } else {
        ++result.excluded_count[k];
      }
    }
    if (h_total > 0.0 && e_total > 0.0 && std::isfinite(e_total) && std::isfinite(h_total)) {
      total_log_sum += std::log(e_total / h_total);
      ++total_counted;
    } else {
      ++result.total_excluded;
    }
  };

  QuadraticOracle oracle(problem, rng);
  const RunResult run = run_async(oracle, config, groups, delay, problem.w0, options);

  result.steps = run.steps_run;
  result.status = run.status;
  result.component_ratio.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    result.component_ratio[k] =
        counted[k] > 0 ? std::exp(log_sum[k] / static_cast<double>(counted[k])) : 1.0;
  }
  result.total_ratio =
      total_counted > 0 ? std::exp(total_log_sum / static_cast<double>(total_counted)) : 1.0;
  return result;
}

}  // namespace abrake
