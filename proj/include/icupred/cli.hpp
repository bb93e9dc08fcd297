#pragma once

namespace icupred::cli {

// Entry point behind the `icupred` binary. Subcommands: synth, run, score,
// predict. Returns 0 on success, 2 on usage/validation errors, 1 otherwise.
int cli_main(int argc, const char* const* argv);

}  // namespace icupred::cli
