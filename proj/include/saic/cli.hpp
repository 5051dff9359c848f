#pragma once

namespace saic::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `saic` tool; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace saic::cli
