#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fedtd::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. Artifact paths go to `out`, one per line;
// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fedtd::cli
