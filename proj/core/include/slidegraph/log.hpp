// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

namespace slidegraph::log {

using Sink = std::function<void(std::string_view)>;

/// Replace the warning sink (default writes to stderr). Returns the previous one.
Sink set_warning_sink(Sink sink);

void warn(std::string_view message);

/// Total number of warnings emitted in this process.
std::size_t warning_count();

}  // namespace slidegraph::log
