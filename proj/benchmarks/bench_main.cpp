// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <numeric>

#include "abrake/mlp.hpp"
#include "abrake/nqm.hpp"
#include "abrake/optimizers.hpp"
#include "abrake/rng.hpp"

namespace {

using namespace abrake;

OptimizerConfig config_for(Algorithm a) {
  OptimizerConfig c;
  c.algorithm = a;
  c.eta = 0.01;
  c.momentum = 0.9;
  c.rho = 1.0;
  c.micro_steps = 16;
  return c;
}

void BM_Sgdm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  ParamVector w = gaussian_sample(rng, n);
  const ParamVector g = gaussian_sample(rng, n);
  auto s = OptimizerState::make(Algorithm::SGDM, n, 1);
  const auto cfg = config_for(Algorithm::SGDM);
  for (auto _ : state) {
    sgdm_step(w, s, g, cfg);
    benchmark::DoNotOptimize(w.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sgdm)->Arg(1 << 10)->Arg(1 << 16);

void BM_Ab(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const bool per_element = state.range(1) != 0;
  Rng rng(2);
  ParamVector w = gaussian_sample(rng, n);
  const ParamVector g = gaussian_sample(rng, n);
  auto s = OptimizerState::make(Algorithm::AB, n, 1);
  const auto groups = per_element ? GroupSpec::per_element(n) : GroupSpec::global(n);
  const auto cfg = config_for(Algorithm::AB);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ab_step(w, s, g, cfg, groups));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ab)->Args({1 << 10, 0})->Args({1 << 16, 0})->Args({1 << 10, 1});

void BM_MicroStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  ParamVector w = gaussian_sample(rng, n);
  const ParamVector g = gaussian_sample(rng, n);
  auto s = OptimizerState::make(Algorithm::AB_MicroStep, n, 1);
  const auto groups = GroupSpec::global(n);
  const auto cfg = config_for(Algorithm::AB_MicroStep);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ab_microstep(w, s, g, cfg, groups));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MicroStep)->Arg(1 << 10)->Arg(1 << 16);

void BM_QuadraticGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto problem = QuadraticProblem::diagonal(make_inverse_spectrum(n), 1.0);
  Rng rng(4);
  ParamVector g(n);
  for (auto _ : state) {
    quadratic_gradient(problem, problem.w0, rng, g);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QuadraticGradient)->Arg(100)->Arg(10000);

void BM_MlpForwardBackward(benchmark::State& state) {
  const MlpSpec spec{{2, 32, 32, 3}};
  const auto data = make_blobs(BlobOptions{}, 5);
  Rng rng(6);
  const ParamVector params = init_params(spec, rng);
  std::vector<std::size_t> batch(static_cast<std::size_t>(state.range(0)));
  std::iota(batch.begin(), batch.end(), std::size_t{0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_backward(spec, params, data, batch));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(32)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
