#pragma once

namespace rpinn {

// Entry point of the command-line tool (exposed as a library function so the
// test suite can drive it in-process). Commands:
//
//   rpinn run <config.json>       train per the config, write artifacts
//   rpinn sweep <config.json>     grid of runs over the config's sweep axes
//   rpinn estimate <config.json>  per-element error indicator of a checkpoint
//
// Shared flags: --seed N, --out DIR, --override key=value (repeatable;
// dotted keys reach nested objects, values parsed as JSON when possible).
//
// Returns the process exit code: 0 success, 1 configuration/usage error,
// 2 runtime failure.
int cli_main(int argc, const char* const* argv);

}  // namespace rpinn
