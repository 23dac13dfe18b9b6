#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smartq::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // partial failure or incomplete input
inline constexpr int kExitUsage = 2;    // bad flags, bad config, unwritable output

// Entry point for `smartq <command> [flags]`; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smartq::cli
