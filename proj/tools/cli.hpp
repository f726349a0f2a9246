#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mdm::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitStatistical = 3;
inline constexpr int kExitIo = 4;

inline constexpr const char* kVersion = "0.1.0";

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mdm::cli
