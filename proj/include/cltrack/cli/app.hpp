#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cltrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutEnv = "CLTRACK_OUT";

/// Runs one command line (without the program name). Verbs: verify, simulate, compare,
/// gradcheck, bench, replay. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cltrack::cli
