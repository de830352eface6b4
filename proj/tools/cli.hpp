#pragma once

#include <string>
#include <vector>

namespace etbox::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Runs one CLI invocation; args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace etbox::cli
