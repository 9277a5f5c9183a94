// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abrake {

/// Violated precondition on shapes, ranges or group layouts.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid user-facing configuration. The message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite value produced while evaluating a model.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t layer)
      : std::runtime_error(what), layer_(layer) {}

  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

}  // namespace abrake
