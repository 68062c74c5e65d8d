#pragma once

#include <string>
#include <vector>

namespace triplesum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

// Parses and runs one command line; `args` excludes the program name.
// Never throws.
int run(const std::vector<std::string>& args);

}  // namespace triplesum::cli
