#pragma once

#include <iosfwd>

namespace kgfilon {

/// Entry point of the `kgfilon` tool. Subcommands: solve, convergence,
/// omega-sweep, compare, moments. Returns 0 on success; otherwise writes a
/// one-line diagnostic to `err` and returns nonzero.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kgfilon
