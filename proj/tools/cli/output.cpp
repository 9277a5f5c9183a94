// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "output.hpp"

#include <fstream>
#include <ostream>

#include "abrake/format.hpp"
#include "errors.hpp"

namespace abrake::cli {

Provenance make_provenance(const std::string& command, const ExperimentConfig& config) {
  return {command, config_hash(config), config.seed, canonical_dump(config)};
}

void write_header(std::ostream& out, const Provenance& p) {
  out << "# abrake " << p.command << '\n'
      << "# config_hash: " << p.config_hash << '\n'
      << "# seed: " << p.seed << '\n'
      << "# config: " << p.config << '\n';
}

Json provenance_json(const Provenance& p) {
  return {{"command", p.command},
          {"config_hash", p.config_hash},
          {"seed", p.seed},
          {"config", Json::parse(p.config)}};
}

namespace {

std::string field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string at(const std::vector<double>& v, std::size_t i) {
  return i < v.size() ? format_double(v[i]) : "";
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace, std::size_t groups,
                     bool with_groups) {
  out << "step,lr,loss,energy,accuracy,update_alignment";
  if (with_groups) {
    for (std::size_t i = 0; i < groups; ++i) out << ",alpha_" << i;
    for (std::size_t i = 0; i < groups; ++i) out << ",grad_norm_" << i;
    for (std::size_t i = 0; i < groups; ++i) out << ",vel_norm_" << i;
    for (std::size_t i = 0; i < groups; ++i) out << ",gvr_" << i;
  }
  out << '\n';
  for (const TraceRow& row : trace) {
    out << row.step << ',' << format_double(row.lr) << ',' << format_double(row.loss) << ','
        << field(row.energy) << ',' << field(row.accuracy) << ',' << field(row.update_alignment);
    if (with_groups) {
      for (std::size_t i = 0; i < groups; ++i) out << ',' << at(row.alpha, i);
      for (std::size_t i = 0; i < groups; ++i) out << ',' << at(row.grad_norm, i);
      for (std::size_t i = 0; i < groups; ++i) out << ',' << at(row.vel_norm, i);
      for (std::size_t i = 0; i < groups; ++i) out << ',' << at(row.gvr, i);
    }
    out << '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << content;
  f.close();
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace abrake::cli
