// Copyright 2026 The abrake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace abrake {

/// Shortest text that reads back to the same double. Infinities print as
/// "inf" / "-inf", NaN as "nan".
std::string format_double(double value);

/// Inverse of format_double; nullopt unless the whole string is consumed.
std::optional<double> parse_double(std::string_view text);

}  // namespace abrake
