// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "abrake/param_vector.hpp"

namespace abrake {

/// Counter-based generator: the i-th output is a bijective mix of
/// (key + i * gamma), so a stream is fully determined by its key and position.
/// Substreams derive a fresh key from (key, index), which lets sweep cells run
/// in any order with identical results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept;

  /// Independent stream for `index`; does not advance this generator.
  Rng substream(std::uint64_t index) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double next_uniform() noexcept;
  /// Standard normal (Box-Muller, second value cached).
  double next_normal() noexcept;
  /// Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// n i.i.d. standard-normal draws.
ParamVector gaussian_sample(Rng& rng, std::size_t n);

}  // namespace abrake
