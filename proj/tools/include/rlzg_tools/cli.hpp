#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rlzg::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitCorrupt = 4;

// Runs the tool. `args` excludes the program name. Normal output goes to
// `out`, diagnostics to `err`; nothing throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rlzg::cli
