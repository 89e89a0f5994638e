// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace invopt::cli {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitModel = 2;

/// Runs one invocation. Returns 0 on an optimal result, 2 on a model-level
/// failure (infeasible inverse, big-M violation, ...) and 1 on usage or input
/// errors. result.json is written to the output directory on exit 0 and 2.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace invopt::cli
