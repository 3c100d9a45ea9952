#pragma once

namespace tact::harness {

// Entry point behind the `tactoshape` binary, separated out so tests can
// drive the command surface in-process. Commands: train, run, eval,
// export-mesh. Returns the process exit code: 0 on success, nonzero after
// printing a single `error: ...` line to stderr.
int cli_main(int argc, const char* const* argv);

} // namespace tact::harness
