#pragma once

#include <string>
#include <vector>

namespace adasmooth::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_data = 3;
inline constexpr int exit_numerical = 4;

//! Parses and runs one subcommand; returns the process exit code.
int run(int argc, const char* const* argv);

//! Convenience wrapper taking the arguments after the program name.
int run(const std::vector<std::string>& args);

} // namespace adasmooth::cli
