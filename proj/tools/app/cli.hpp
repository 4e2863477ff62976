// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slidegraph::app {

/// Exit codes: 0 success, 1 stage failure (missing/incompatible inputs,
/// format errors), 2 usage or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slidegraph::app
