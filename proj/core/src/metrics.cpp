// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "abrake/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "abrake/delay_harness.hpp"
#include "abrake/errors.hpp"

namespace abrake {

double gvr_from_norms(double grad_norm, double vel_norm) noexcept {
  if (vel_norm == 0.0) return std::numeric_limits<double>::infinity();
  return grad_norm / vel_norm;
}

double gvr(std::span<const double> g, std::span<const double> v, IndexRange group) {
  require_same_size(g, v, "gvr");
  if (group.empty()) throw ContractError("gvr: empty group");
  return gvr_from_norms(norm(g, group), norm(v, group));
}

namespace {

double clamp_cosine(double c) noexcept { return std::clamp(c, -1.0, 1.0); }

}  // namespace

double update_alignment(std::span<const double> g, std::span<const double> v, double alpha,
                        double momentum, IndexRange group) {
  require_same_size(g, v, "update_alignment");
  if (group.empty() || group.end > g.size()) throw ContractError("update_alignment: bad group");
  double ug = 0.0, uu = 0.0, gg = 0.0;
  for (std::size_t k = group.begin; k < group.end; ++k) {
    const double u = momentum * v[k] + alpha * g[k];
    ug += u * g[k];
    uu += u * u;
    gg += g[k] * g[k];
  }
  if (uu == 0.0) throw ContractError("update_alignment: zero update");
  if (gg == 0.0) throw ContractError("update_alignment: zero gradient");
  return clamp_cosine(ug / (std::sqrt(uu) * std::sqrt(gg)));
}

double update_alignment(std::span<const double> g, std::span<const double> v,
                        std::span<const double> alpha_per_group, double momentum,
                        const GroupSpec& groups) {
  require_same_size(g, v, "update_alignment");
  groups.require_covers(g.size());
  if (alpha_per_group.size() != groups.size()) {
    throw ContractError("update_alignment: one alpha per group required");
  }
  double ug = 0.0, uu = 0.0, gg = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const IndexRange& r = groups[i];
    for (std::size_t k = r.begin; k < r.end; ++k) {
      const double u = momentum * v[k] + alpha_per_group[i] * g[k];
      ug += u * g[k];
      uu += u * u;
      gg += g[k] * g[k];
    }
  }
  if (uu == 0.0) throw ContractError("update_alignment: zero update");
  if (gg == 0.0) throw ContractError("update_alignment: zero gradient");
  return clamp_cosine(ug / (std::sqrt(uu) * std::sqrt(gg)));
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ContractError("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw ContractError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return percentile(std::move(values), 50.0); }

std::optional<double> final_metric(const std::vector<TraceRow>& trace,
                                   const std::function<std::optional<double>(const TraceRow&)>& metric,
                                   std::size_t last_k) {
  if (last_k == 0) throw ContractError("final_metric: last_k must be >= 1");
  std::vector<double> values;
  const std::size_t first = trace.size() > last_k ? trace.size() - last_k : 0;
  for (std::size_t i = first; i < trace.size(); ++i) {
    if (auto value = metric(trace[i])) values.push_back(*value);
  }
  if (values.empty()) return std::nullopt;
  return median(std::move(values));
}

namespace {

MetricSummary summarize(const std::vector<double>& values, const AggregateOptions& options) {
  MetricSummary s;
  s.count = values.size();
  s.median = median(values);
  for (double p : options.percentiles) s.percentiles[p] = percentile(values, p);
  return s;
}

}  // namespace

std::map<std::string, MetricSummary> aggregate(const std::vector<RunResult>& runs,
                                               const AggregateOptions& options) {
  if (runs.empty()) throw ContractError("aggregate needs at least one run");
  std::vector<double> losses, accuracies, steps;
  for (const RunResult& run : runs) {
    auto loss = final_metric(run.trace, [](const TraceRow& r) { return std::optional(r.loss); },
                             options.last_k);
    losses.push_back(loss.value_or(run.final_loss));
    if (auto acc = final_metric(run.trace, [](const TraceRow& r) { return r.accuracy; },
                                options.last_k)) {
      accuracies.push_back(*acc);
    }
    if (run.steps_to_target) steps.push_back(static_cast<double>(*run.steps_to_target));
  }
  std::map<std::string, MetricSummary> out;
  out["final_loss"] = summarize(losses, options);
  if (!accuracies.empty()) out["final_accuracy"] = summarize(accuracies, options);
  if (!steps.empty()) out["steps_to_target"] = summarize(steps, options);
  return out;
}

}  // namespace abrake
