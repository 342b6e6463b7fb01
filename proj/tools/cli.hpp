#pragma once

#include <iosfwd>

namespace fluxshape::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNonConvergence = 3;

/// Runs one fluxshape subcommand. Messages go to `out` and `err`; files go
/// under --out-dir, with manifest.json written last on success only.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace fluxshape::cli
