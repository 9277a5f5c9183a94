// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace abrake {

/// Half-open index range [begin, end) into a flat parameter vector.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end <= begin; }

  static IndexRange all(std::size_t n) noexcept { return {0, n}; }

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Flat array of 64-bit scalars. Holds weights, velocities and gradients.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }
  operator std::span<double>() noexcept { return values_; }

  const std::vector<double>& values() const noexcept { return values_; }

  void fill(double value);

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

/// Sum of a_k * b_k over `range`. Throws ContractError on length mismatch or
/// an out-of-bounds range.
double dot(std::span<const double> a, std::span<const double> b, IndexRange range);
double dot(std::span<const double> a, std::span<const double> b);

/// Euclidean norm over `range`; exactly 0 for a zero vector.
double norm(std::span<const double> a, IndexRange range);
double norm(std::span<const double> a);

double squared_norm(std::span<const double> a, IndexRange range);

bool all_finite(std::span<const double> a) noexcept;

/// Throws ContractError unless a.size() == b.size().
void require_same_size(std::span<const double> a, std::span<const double> b, const char* what);

}  // namespace abrake
