#pragma once

#include <iosfwd>

namespace lfsc {

// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitBadInput = 2,     // unreadable/unsupported input file or unknown magic
    kExitBadModel = 3,     // weight file missing or invalid
    kExitSpecMismatch = 4, // bitstream/override layout differs from the model
    kExitCorrupt = 5,      // truncated or corrupt bitstream / weight file
    kExitOutput = 6,       // output file could not be written
};

// Runs `lfsc <subcommand> ...`. Failures print one line to `err` of the form
// "error: <kind>: <message>".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lfsc
