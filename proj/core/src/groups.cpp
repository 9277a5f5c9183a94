// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "abrake/groups.hpp"

#include <string>

#include "abrake/errors.hpp"

namespace abrake {

std::string_view to_string(GroupMode mode) noexcept {
  switch (mode) {
    case GroupMode::Global: return "global";
    case GroupMode::PerTensor: return "tensor";
    case GroupMode::PerFilter: return "filter";
    case GroupMode::PerElement: return "element";
  }
  return "global";
}

std::optional<GroupMode> parse_group_mode(std::string_view name) noexcept {
  if (name.starts_with("per_")) name.remove_prefix(4);
  if (name == "global") return GroupMode::Global;
  if (name == "tensor") return GroupMode::PerTensor;
  if (name == "filter") return GroupMode::PerFilter;
  if (name == "element") return GroupMode::PerElement;
  return std::nullopt;
}

GroupSpec::GroupSpec(GroupMode mode, std::vector<IndexRange> groups, std::size_t parameter_count)
    : mode_(mode), groups_(std::move(groups)), parameter_count_(parameter_count) {
  require_covers(parameter_count);
  if (mode_ == GroupMode::Global && groups_.size() != 1) {
    throw ContractError("global grouping must have exactly one group");
  }
  if (mode_ == GroupMode::PerElement && groups_.size() != parameter_count_) {
    throw ContractError("element grouping must have one group per parameter");
  }
}

GroupSpec GroupSpec::global(std::size_t n) {
  return GroupSpec(GroupMode::Global, {IndexRange::all(n)}, n);
}

GroupSpec GroupSpec::per_element(std::size_t n) {
  std::vector<IndexRange> groups;
  groups.reserve(n);
  for (std::size_t k = 0; k < n; ++k) groups.push_back({k, k + 1});
  return GroupSpec(GroupMode::PerElement, std::move(groups), n);
}

void GroupSpec::require_covers(std::size_t n) const {
  if (n == 0) throw ContractError("group layout over an empty parameter vector");
  if (n != parameter_count_) {
    throw ContractError("group layout covers " + std::to_string(parameter_count_) +
                        " parameters, vector has " + std::to_string(n));
  }
  // Ordered contiguous ranges: the partition property reduces to each group
  // starting where the previous one ended and the last ending at n.
  std::size_t next = 0;
  for (const auto& g : groups_) {
    if (g.begin != next || g.empty()) {
      throw ContractError("groups do not partition the parameter vector at index " +
                          std::to_string(next));
    }
    next = g.end;
  }
  if (next != n) {
    throw ContractError("groups cover [0, " + std::to_string(next) + ") of " + std::to_string(n));
  }
}

}  // namespace abrake
