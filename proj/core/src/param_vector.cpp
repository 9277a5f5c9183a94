// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#include "abrake/param_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "abrake/errors.hpp"

namespace abrake {

namespace {

void require_in_bounds(IndexRange range, std::size_t n) {
  if (range.begin > range.end || range.end > n) {
    throw ContractError("index range [" + std::to_string(range.begin) + ", " +
                        std::to_string(range.end) + ") out of bounds for length " +
                        std::to_string(n));
  }
}

}  // namespace

void ParamVector::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

void require_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw ContractError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b, IndexRange range) {
  require_same_size(a, b, "dot");
  require_in_bounds(range, a.size());
  double sum = 0.0;
  for (std::size_t k = range.begin; k < range.end; ++k) sum += a[k] * b[k];
  return sum;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return dot(a, b, IndexRange::all(a.size()));
}

double squared_norm(std::span<const double> a, IndexRange range) {
  require_in_bounds(range, a.size());
  double sum = 0.0;
  for (std::size_t k = range.begin; k < range.end; ++k) sum += a[k] * a[k];
  return sum;
}

double norm(std::span<const double> a, IndexRange range) { return std::sqrt(squared_norm(a, range)); }

double norm(std::span<const double> a) { return norm(a, IndexRange::all(a.size())); }

bool all_finite(std::span<const double> a) noexcept {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace abrake
