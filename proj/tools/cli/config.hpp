// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abrake/delay_harness.hpp"
#include "abrake/groups.hpp"
#include "abrake/mlp.hpp"
#include "abrake/nqm.hpp"
#include "abrake/optimizers.hpp"

namespace abrake::cli {

using Json = nlohmann::json;

enum class ProblemKind { Nqm, Mlp };

struct NqmConfig {
  std::string spectrum = "inverse";  // inverse | loguniform | explicit
  std::size_t dimension = 100;
  double lo = 1e-4;  // loguniform only
  double hi = 1.0;
  std::vector<double> eigenvalues;  // explicit only
  double noise_sigma = 0.0;
  std::vector<double> w0;  // empty: all ones
  bool rotate = false;
};

struct MlpConfig {
  std::vector<std::size_t> layers{2, 32, 3};
  BlobOptions blobs;
  std::optional<std::string> dataset;  // CSV path; replaces the blobs
  std::size_t batch_size = 32;
};

struct SweepConfig {
  std::vector<double> eta;
  std::vector<double> momentum;
  std::size_t trials = 1;
};

/// Everything that determines a result. Output location and thread count
/// live in ExecutionOptions and are not part of the provenance.
struct ExperimentConfig {
  ProblemKind kind = ProblemKind::Nqm;
  NqmConfig nqm;
  MlpConfig mlp;
  OptimizerConfig optimizer;
  GroupMode grouping = GroupMode::Global;
  std::size_t delay = 0;
  std::size_t max_steps = 1000;
  std::optional<double> target_loss;  // defaults to 0.01 for nqm problems
  TracePolicy trace{1, true, false};
  LrSchedule schedule;
  std::uint64_t seed = 0;
  SweepConfig sweep;
  std::vector<Algorithm> ablate;
};

struct ExecutionOptions {
  std::filesystem::path out_dir = ".";
  std::size_t parallelism = 0;  // 0: hardware threads
};

/// Strict parse: unknown keys, wrong types and invalid values throw
/// ConfigError with the dotted path of the offending field.
ExperimentConfig config_from_json(const Json& doc);
/// Fully resolved document; config_from_json(to_json(c)) reproduces c.
Json to_json(const ExperimentConfig& config);

/// Compact serialization with sorted keys.
std::string canonical_dump(const ExperimentConfig& config);
/// FNV-1a 64 of canonical_dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::string valid_algorithm_names();

/// Problem built from the config; rotation drawn from the seed.
QuadraticProblem build_quadratic(const ExperimentConfig& config);
MlpSpec build_mlp_spec(const ExperimentConfig& config);
/// Loads the dataset CSV if configured, otherwise generates blobs from the seed.
SyntheticDataset build_dataset(const ExperimentConfig& config);

}  // namespace abrake::cli
