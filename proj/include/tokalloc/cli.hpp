#pragma once

#include <iosfwd>

namespace tokalloc::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kInfeasible = 3,
  kOracleRefused = 4,
};

/// Entry point behind the `tokalloc` executable. Results go to the --out
/// file or `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tokalloc::cli
