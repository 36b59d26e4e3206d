#pragma once

#include <iosfwd>

namespace courtsketch {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Subcommands: ingest, sketchify, synth-data, train, simulate, eval, serve.
/// Returns 0 on success, 1 on usage errors and 2 on runtime errors.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace courtsketch
