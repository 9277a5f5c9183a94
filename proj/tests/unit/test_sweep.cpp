#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "abrake/errors.hpp"
#include "abrake/sweep.hpp"

using namespace abrake;

namespace {

OptimizerConfig sgdm(double m = 0.0) {
  OptimizerConfig c;
  c.eta = 0.1;
  c.momentum = m;
  return c;
}

TrialOutcome converged(std::size_t t) { return {RunStatus::Converged, t}; }
TrialOutcome timeout() { return {RunStatus::Timeout, std::nullopt}; }
TrialOutcome diverged() { return {RunStatus::Diverged, std::nullopt}; }

// Steps for |1 - eta*lambda|^(2t) * L0 <= target with L0 = lambda / 2.
std::size_t closed_form_t(double lambda, double eta, double target) {
  const double l0 = 0.5 * lambda;
  if (l0 <= target) return 0;
  const double r = std::pow(1.0 - eta * lambda, 2.0);
  return static_cast<std::size_t>(std::ceil(std::log(target / l0) / std::log(r)));
}

}  // namespace

TEST(Outcome, Ordering) {
  EXPECT_TRUE(outcome_less(converged(5), converged(6)));
  EXPECT_TRUE(outcome_less(converged(1000), timeout()));
  EXPECT_TRUE(outcome_less(timeout(), diverged()));
  EXPECT_FALSE(outcome_less(diverged(), timeout()));
  EXPECT_EQ(median_outcome({diverged(), converged(3), timeout()}), timeout());
  EXPECT_EQ(median_outcome({converged(9), converged(3)}), converged(3));
  EXPECT_EQ(median_outcome({diverged(), diverged(), converged(1)}), diverged());
}

TEST(Sweep, ClosedFormRow) {
  const auto p = QuadraticProblem::diagonal({1.0});
  SweepGrid grid;
  grid.eta_values = {0.5, 2.5};
  grid.momentum_values = {0.0};
  grid.max_steps = 1000;
  const auto r = run_sweep(p, sgdm(), GroupSpec::global(1), DelayConfig{0}, grid, 1);
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(r.cells[0].median, converged(3));
  EXPECT_EQ(r.cells[1].median.status, RunStatus::Diverged);
  EXPECT_EQ(r.t_star, 3.0);
}

TEST(Sweep, MonotoneDivergenceBoundary) {
  for (double lambda : {1.0, 0.3, 4.0}) {
    auto p = QuadraticProblem::diagonal({lambda});
    SweepGrid grid;
    grid.eta_values = log_space(0.05 / lambda, 3.0 / lambda, 25);
    grid.momentum_values = {0.0};
    grid.max_steps = 20000;
    grid.target = 1e-3;
    const auto r = run_sweep(p, sgdm(), GroupSpec::global(1), DelayConfig{0}, grid, 2);
    for (const auto& cell : r.cells) {
      const double x = cell.eta * lambda;
      if (x >= 2.0) {
        EXPECT_EQ(cell.median.status, RunStatus::Diverged) << x;
      } else {
        EXPECT_NE(cell.median.status, RunStatus::Diverged) << x;
        if (cell.median.status == RunStatus::Converged) {
          EXPECT_EQ(*cell.median.steps, closed_form_t(lambda, cell.eta, grid.target)) << x;
        }
      }
    }
  }
}

TEST(Sweep, AllTimeoutHasNoTStar) {
  const auto p = QuadraticProblem::diagonal({1.0});
  SweepGrid grid;
  grid.eta_values = {1e-6, 1e-5};
  grid.momentum_values = {0.0, 0.5};
  grid.max_steps = 10;
  const auto r = run_sweep(p, sgdm(), GroupSpec::global(1), DelayConfig{0}, grid, 1);
  for (const auto& cell : r.cells) EXPECT_EQ(cell.median, timeout());
  EXPECT_FALSE(r.t_star.has_value());
}

TEST(Sweep, MoreTrialsKeepEarlierTrials) {
  const auto p = QuadraticProblem::diagonal(make_inverse_spectrum(10), 1.0);
  SweepGrid grid;
  grid.eta_values = {0.3, 1.0};
  grid.momentum_values = {0.0, 0.9};
  grid.max_steps = 3000;
  grid.target = 0.05;
  grid.trials = 1;
  const auto one = run_sweep(p, sgdm(), GroupSpec::global(10), DelayConfig{1}, grid, 77);
  grid.trials = 3;
  const auto three = run_sweep(p, sgdm(), GroupSpec::global(10), DelayConfig{1}, grid, 77);
  for (std::size_t c = 0; c < one.cells.size(); ++c) {
    EXPECT_EQ(one.cells[c].trials[0], three.cells[c].trials[0]);
    EXPECT_EQ(three.cells[c].trials.size(), 3u);
  }
}

TEST(Sweep, ResultIndependentOfParallelismAndCellOrder) {
  const auto p = QuadraticProblem::diagonal(make_inverse_spectrum(10), 1.0);
  SweepGrid grid;
  grid.eta_values = log_space(0.05, 3.0, 6);
  grid.momentum_values = {0.0, 0.5, 0.9};
  grid.max_steps = 2000;
  grid.target = 0.05;
  grid.trials = 2;
  const auto serial = run_sweep(p, sgdm(), GroupSpec::global(10), DelayConfig{2}, grid, 5, 1);
  const auto threaded = run_sweep(p, sgdm(), GroupSpec::global(10), DelayConfig{2}, grid, 5, 4);
  EXPECT_EQ(serial.cells, threaded.cells);
  EXPECT_EQ(serial.t_star, threaded.t_star);

  // Evaluate the cells back to front by hand.
  for (std::size_t c = serial.cells.size(); c-- > 0;) {
    const auto& cell = serial.cells[c];
    OptimizerConfig cfg = sgdm(cell.momentum);
    cfg.eta = cell.eta;
    for (std::size_t k = 0; k < grid.trials; ++k) {
      const auto out = run_cell_trial(p, cfg, GroupSpec::global(10), DelayConfig{2},
                                      grid.max_steps, grid.target,
                                      Rng(5).substream(c).substream(k));
      EXPECT_EQ(out, cell.trials[k]);
    }
  }
}

TEST(TStar, Examples) {
  SweepResult r;
  for (std::size_t t = 1; t <= 100; ++t) {
    CellOutcome c;
    c.median = converged(t);
    r.cells.push_back(c);
  }
  EXPECT_NEAR(*t_star(r), 1.99, 1e-12);
  CellOutcome d;
  d.median = diverged();
  r.cells.push_back(d);
  EXPECT_NEAR(*t_star(r), 1.99, 1e-12);

  SweepResult single;
  CellOutcome c;
  c.median = converged(100);
  single.cells = {c};
  EXPECT_EQ(t_star(single), 100.0);
}

TEST(TStar, NeverBelowFastestCell) {
  const auto p = QuadraticProblem::diagonal(make_inverse_spectrum(20), 0.5);
  SweepGrid grid;
  grid.eta_values = log_space(0.1, 2.0, 5);
  grid.momentum_values = {0.0, 0.9};
  grid.max_steps = 3000;
  grid.target = 0.1;
  const auto r = run_sweep(p, sgdm(), GroupSpec::global(20), DelayConfig{1}, grid, 3);
  ASSERT_TRUE(r.t_star.has_value());
  std::size_t best = SIZE_MAX;
  for (const auto& cell : r.cells) {
    if (cell.median.status == RunStatus::Converged) best = std::min(best, *cell.median.steps);
  }
  EXPECT_GE(*r.t_star, static_cast<double>(best));
}

TEST(Grid, Validation) {
  SweepGrid g;
  EXPECT_THROW(g.validate(), ConfigError);
  g.eta_values = {0.1};
  g.momentum_values = {1.0};
  EXPECT_THROW(g.validate(), ConfigError);
  g.momentum_values = {0.9};
  EXPECT_NO_THROW(g.validate());
  g.trials = 0;
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(LogSpace, Endpoints) {
  const auto v = log_space(1e-3, 10.0, 5);
  EXPECT_EQ(v.front(), 1e-3);
  EXPECT_EQ(v.back(), 10.0);
  EXPECT_NEAR(v[2], 0.1, 1e-15);
}
