// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace mensa::cli {

inline constexpr const char* kVersion = "0.1.0";

// Entry point of the mensa-sim command line tool.
// Exit codes: 0 success, 1 usage error, 2 invalid input file,
// 3 internal invariant failure.
int run(int argc, const char* const* argv);

}  // namespace mensa::cli
