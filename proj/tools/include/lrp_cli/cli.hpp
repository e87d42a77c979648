#pragma once

#include <ostream>
#include <span>
#include <string>

namespace lrp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitVerifyFailed = 3;

/// Runs one invocation of the `lrp` tool. `args` excludes the program name.
/// Results go to `out`; failures are one JSON line on `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace lrp::cli
