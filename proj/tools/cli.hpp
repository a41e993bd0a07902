#pragma once

namespace civqr::cli {

// Parses argv and runs one of the subcommands (fit, bootstrap, simulate,
// diagnose, synth).  Reports go to stdout or the --out file as JSON.
// Returns the process exit code: 0 on success, nonzero on any error.
int run(int argc, const char* const* argv);

}  // namespace civqr::cli
