// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "config.hpp"

namespace abrake::cli {

/// run, train, sweep, energy, ablate, dataset
std::span<const std::string_view> command_names() noexcept;

/// Executes one command and writes its files under options.out_dir. Prints a
/// one-line result to `log`. Throws ConfigError or IoError.
void execute(std::string_view command, const ExperimentConfig& config,
             const ExecutionOptions& options, std::ostream& log);

}  // namespace abrake::cli
