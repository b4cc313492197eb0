#pragma once

namespace mshift::cli {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_infeasible = 2;
constexpr int exit_violation = 3;

// Full command-line entry point (subcommands: gen, compare, sensitivity,
// pareto, verify, berlin). Returns the process exit code; never throws.
int run(int argc, const char* const* argv);

} // namespace mshift::cli
