#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace eoscope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "EOSCOPE_OUT";

// args[0] is the program name. Summaries go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eoscope::cli
