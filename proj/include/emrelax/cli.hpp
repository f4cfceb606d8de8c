#pragma once

// Command-line front end. Subcommands: symbol-scan, lyapunov-search,
// pointwise-verify, simulate, relax-study.
//
// Exit codes: 0 success, 1 threshold violation (verify-type commands),
// 2 usage or configuration error, 3 numerical abort (vacuum, CFL).

#include <ostream>
#include <string>
#include <vector>

namespace emrelax {

inline constexpr int kExitOk = 0;
inline constexpr int kExitThreshold = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emrelax
