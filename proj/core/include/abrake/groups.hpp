// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "abrake/param_vector.hpp"

namespace abrake {

enum class GroupMode { Global, PerTensor, PerFilter, PerElement };

std::string_view to_string(GroupMode mode) noexcept;
/// Accepts "global", "tensor", "filter", "element" (and the "per_" forms).
std::optional<GroupMode> parse_group_mode(std::string_view name) noexcept;

/// Partition of [0, n) into ordered, contiguous, non-empty index ranges over
/// which a gradient/velocity alignment is computed.
class GroupSpec {
 public:
  /// Validates that `groups` exactly partitions [0, parameter_count).
  GroupSpec(GroupMode mode, std::vector<IndexRange> groups, std::size_t parameter_count);

  static GroupSpec global(std::size_t n);
  static GroupSpec per_element(std::size_t n);

  GroupMode mode() const noexcept { return mode_; }
  const std::vector<IndexRange>& groups() const noexcept { return groups_; }
  std::size_t size() const noexcept { return groups_.size(); }
  std::size_t parameter_count() const noexcept { return parameter_count_; }
  const IndexRange& operator[](std::size_t i) const { return groups_[i]; }

  /// Throws ContractError unless this spec partitions a vector of length n.
  void require_covers(std::size_t n) const;

 private:
  GroupMode mode_;
  std::vector<IndexRange> groups_;
  std::size_t parameter_count_;
};

}  // namespace abrake
