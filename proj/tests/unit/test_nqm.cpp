#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "abrake/errors.hpp"
#include "abrake/nqm.hpp"
#include "abrake/rng.hpp"

using namespace abrake;

TEST(Spectrum, Inverse) {
  const auto s = make_inverse_spectrum(4);
  EXPECT_EQ(s, (std::vector<double>{1.0, 0.5, 1.0 / 3.0, 0.25}));
  EXPECT_THROW(make_inverse_spectrum(0), ContractError);
}

TEST(Spectrum, LogUniformEndpointsAndRatios) {
  const auto s = make_loguniform_spectrum(32, 1e-4, 1.0);
  ASSERT_EQ(s.size(), 32u);
  EXPECT_EQ(s.front(), 1e-4);
  EXPECT_EQ(s.back(), 1.0);
  const double r = s[1] / s[0];
  for (std::size_t j = 1; j < s.size(); ++j) EXPECT_NEAR(s[j] / s[j - 1], r, 1e-12);
  EXPECT_EQ(make_loguniform_spectrum(1, 0.3, 0.3), std::vector<double>{0.3});
}

TEST(Gradient, NoiselessExample) {
  QuadraticProblem p = QuadraticProblem::diagonal({2.0, 0.5});
  Rng rng(1);
  const ParamVector g = quadratic_gradient(p, ParamVector{1.0, 2.0}, rng);
  EXPECT_EQ(g, (ParamVector{2.0, 1.0}));
  EXPECT_EQ(rng.counter(), 0u);
}

TEST(Loss, Example) {
  QuadraticProblem p = QuadraticProblem::diagonal({2.0, 0.5, 1.0 / 3.0});
  // 1/2 (2 * 1 + 0.5 * 4 + 9 / 3)
  EXPECT_DOUBLE_EQ(quadratic_loss(p, ParamVector{1.0, 2.0, 3.0}), 3.5);
  QuadraticProblem q = QuadraticProblem::diagonal({1.0, 0.5, 1.0 / 3.0});
  EXPECT_DOUBLE_EQ(quadratic_loss(q, ParamVector{1.0, 1.0, 1.0}), 11.0 / 12.0);
}

TEST(Energy, ExampleAndDecomposition) {
  QuadraticProblem p = QuadraticProblem::diagonal({1.0});
  const auto e = energy(p, ParamVector{1.0}, ParamVector{1.0}, 0.4);
  EXPECT_DOUBLE_EQ(e.total, 0.7);
  Rng rng(2);
  QuadraticProblem big = QuadraticProblem::diagonal(make_inverse_spectrum(50));
  const ParamVector w = gaussian_sample(rng, 50), v = gaussian_sample(rng, 50);
  const auto b = energy(big, w, v, 0.3);
  double sum = 0;
  for (double c : b.components) sum += c;
  EXPECT_NEAR(sum, b.total, 1e-12 * b.total);
  EXPECT_NEAR(b.loss + b.kinetic, b.total, 1e-15 * b.total);
}

TEST(Gradient, NoiseCovarianceMatchesHessian) {
  QuadraticProblem p = QuadraticProblem::diagonal({4.0, 1.0, 0.25}, 0.5);
  Rng rng(7);
  const std::size_t draws = 200000;
  const ParamVector zero(3);
  std::vector<double> mean(3, 0.0), var(3, 0.0);
  double cross = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const ParamVector g = quadratic_gradient(p, zero, rng);
    for (std::size_t k = 0; k < 3; ++k) {
      mean[k] += g[k];
      var[k] += g[k] * g[k];
    }
    cross += g[0] * g[1];
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const double expected = 0.25 * p.eigenvalues[k];
    EXPECT_NEAR(mean[k] / draws, 0.0, 5.0 * std::sqrt(expected / draws));
    EXPECT_NEAR(var[k] / draws, expected, 0.02 * expected);
  }
  EXPECT_NEAR(cross / draws, 0.0, 5.0 * std::sqrt(0.25 * 4.0 * 0.25 * 1.0 / draws));
}

TEST(Rotation, IsOrthogonalAndValidates) {
  Rng rng(11);
  QuadraticProblem p = QuadraticProblem::diagonal(make_loguniform_spectrum(16, 1e-2, 1.0));
  p.rotation = random_rotation(16, rng);
  EXPECT_NO_THROW(p.validate());
  auto bad = p;
  (*bad.rotation)[0] += 1e-6;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Rotation, LossAndGradientConjugate) {
  // L_Q(Q^T u) = L(u) and grad L_Q(Q^T u) = Q^T grad L(u)
  Rng rng(12);
  const std::size_t n = 8;
  QuadraticProblem plain = QuadraticProblem::diagonal(make_inverse_spectrum(n));
  QuadraticProblem rotated = plain;
  rotated.rotation = random_rotation(n, rng);
  const auto& q = *rotated.rotation;
  const ParamVector u = gaussian_sample(rng, n);
  ParamVector w(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) w[j] += q[i * n + j] * u[i];
  }
  EXPECT_NEAR(quadratic_loss(rotated, w), quadratic_loss(plain, u), 1e-12);
  Rng unused(0);
  const ParamVector gu = quadratic_gradient(plain, u, unused);
  const ParamVector gw = quadratic_gradient(rotated, w, unused);
  for (std::size_t j = 0; j < n; ++j) {
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) expected += q[i * n + j] * gu[i];
    EXPECT_NEAR(gw[j], expected, 1e-12);
  }
}

TEST(Validate, RejectsBadProblems) {
  EXPECT_THROW(QuadraticProblem::diagonal({}).validate(), ConfigError);
  EXPECT_THROW(QuadraticProblem::diagonal({1.0, 0.0}).validate(), ConfigError);
  EXPECT_THROW(QuadraticProblem::diagonal({1.0}, -1.0).validate(), ConfigError);
  auto p = QuadraticProblem::diagonal({1.0, 2.0});
  p.w0 = ParamVector{1.0};
  EXPECT_THROW(p.validate(), ConfigError);
}

namespace {

OptimizerConfig make_cfg(Algorithm a, double eta, double m, double rho) {
  OptimizerConfig c;
  c.algorithm = a;
  c.eta = eta;
  c.momentum = m;
  c.rho = rho;
  return c;
}

}  // namespace

TEST(EnergyDecay, RhoZeroGivesUnitRatios) {
  const auto p = QuadraticProblem::diagonal(make_inverse_spectrum(20), 1.0);
  const auto r = relative_energy_decay(p, make_cfg(Algorithm::AB, 0.5, 0.9, 0.0),
                                       GroupSpec::global(20), DelayConfig{3}, 300, Rng(4));
  ASSERT_EQ(r.component_ratio.size(), 20u);
  for (double c : r.component_ratio) EXPECT_EQ(c, 1.0);
  EXPECT_EQ(r.total_ratio, 1.0);
  EXPECT_EQ(r.steps, 300u);
}

TEST(EnergyDecay, MatchesDirectEvaluationOnOneStep) {
  // One step from w0 = 1, v = 0: AB has alpha = 1 (zero velocity), so the ratio is 1;
  // the second step brakes along the velocity direction.
  const auto p = QuadraticProblem::diagonal({1.0});
  const auto cfg = make_cfg(Algorithm::AB, 0.1, 0.9, 1.0);
  const auto r = relative_energy_decay(p, cfg, GroupSpec::global(1), DelayConfig{0}, 2, Rng(0));
  // step 1: v = 1, w = 0.9; step 2: g = 0.9 parallel to v so alpha = 0,
  // v = 0.9, w = 0.81 versus SGDM v = 1.8, w = 0.72
  const double e_ab = 0.5 * 0.81 * 0.81 + 0.05 * 0.81;
  const double e_sgd = 0.5 * 0.72 * 0.72 + 0.05 * 1.8 * 1.8;
  EXPECT_NEAR(r.component_ratio[0], std::sqrt(e_ab / e_sgd), 1e-12);
}

TEST(EnergyDecay, RejectsRotatedOrPerWorkerVelocity) {
  Rng rng(1);
  auto p = QuadraticProblem::diagonal(make_inverse_spectrum(4));
  EXPECT_THROW(relative_energy_decay(p, make_cfg(Algorithm::SM, 0.1, 0.9, 0.0),
                                     GroupSpec::global(4), DelayConfig{1}, 10, Rng(0)),
               ContractError);
  p.rotation = random_rotation(4, rng);
  EXPECT_THROW(relative_energy_decay(p, make_cfg(Algorithm::AB, 0.1, 0.9, 0.5),
                                     GroupSpec::global(4), DelayConfig{1}, 10, Rng(0)),
               ContractError);
}
