#pragma once

#include <iosfwd>

namespace anomid {

// Entry point of the command-line tool. Subcommands: solve, alloc, trace,
// simulate, calibrate, reproduce. Returns the process exit code; diagnostics
// go to `err`, CSV output to `out` unless --out names a file.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace anomid
