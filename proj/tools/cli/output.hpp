// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "abrake/delay_harness.hpp"
#include "abrake/groups.hpp"
#include "config.hpp"

namespace abrake::cli {

struct Provenance {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string config;  // canonical JSON
};

Provenance make_provenance(const std::string& command, const ExperimentConfig& config);

/// Lines "# abrake <command>", "# config_hash: ...", "# seed: ...",
/// "# config: <json>".
void write_header(std::ostream& out, const Provenance& p);

/// Provenance block embedded in JSON summaries.
Json provenance_json(const Provenance& p);

/// Trace CSV: step,lr,loss,energy,accuracy,update_alignment then, when the
/// trace carries group diagnostics, alpha_i,grad_norm_i,vel_norm_i,gvr_i for
/// every group i. Absent optional values are empty fields.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace, std::size_t groups,
                     bool with_groups);

/// Creates parent directories and writes `content`; throws IoError.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace abrake::cli
