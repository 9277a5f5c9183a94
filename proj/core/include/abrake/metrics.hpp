// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abrake/groups.hpp"
#include "abrake/param_vector.hpp"

namespace abrake {

struct RunResult;

/// One recorded step of a run. Per-group vectors are empty when group
/// diagnostics were not requested.
struct TraceRow {
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  std::optional<double> energy;
  std::optional<double> accuracy;
  std::vector<double> alpha;
  std::vector<double> grad_norm;
  std::vector<double> vel_norm;
  std::vector<double> gvr;
  std::optional<double> update_alignment;
};

/// |g| / |v|; +infinity when |v| == 0.
double gvr_from_norms(double grad_norm, double vel_norm) noexcept;

/// Gradient velocity ratio over `group`.
double gvr(std::span<const double> g, std::span<const double> v, IndexRange group);

/// cos of the angle between the update direction m v + alpha g and g over
/// `group`. Throws ContractError when the update is zero.
double update_alignment(std::span<const double> g, std::span<const double> v, double alpha,
                        double momentum, IndexRange group);

/// Same over the whole vector, with alpha taken per group.
double update_alignment(std::span<const double> g, std::span<const double> v,
                        std::span<const double> alpha_per_group, double momentum,
                        const GroupSpec& groups);

/// Percentile p in [0, 100] by linear interpolation between closest ranks:
/// rank = p/100 * (n - 1) over the sorted values. Throws on empty input.
double percentile(std::vector<double> values, double p);
double median(std::vector<double> values);

/// Median of `metric` over the last k recorded rows of a trace.
std::optional<double> final_metric(const std::vector<TraceRow>& trace,
                                   const std::function<std::optional<double>(const TraceRow&)>& metric,
                                   std::size_t last_k);

struct MetricSummary {
  std::size_t count = 0;
  double median = 0.0;
  std::map<double, double> percentiles;
};

struct AggregateOptions {
  std::size_t last_k = 1;
  std::vector<double> percentiles{25.0, 75.0};
};

/// Cross-trial summary. Keys: "final_loss" (median of the last k rows' loss,
/// or the run's final loss when untraced), "final_accuracy" when recorded,
/// "steps_to_target" over runs that reached the target.
std::map<std::string, MetricSummary> aggregate(const std::vector<RunResult>& runs,
                                               const AggregateOptions& options = {});

}  // namespace abrake
