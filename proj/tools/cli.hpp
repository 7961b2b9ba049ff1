#pragma once

#include <string>
#include <vector>

namespace secest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitRuntime = 4;

/// Entry point shared by the binary and the tests. argv follows main()
/// conventions (argv[0] is the program name).
int run(int argc, const char* const* argv);

/// Convenience wrapper: run("analyze", "--system", ...).
int run(const std::vector<std::string>& args);

} // namespace secest::cli
