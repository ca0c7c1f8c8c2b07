#pragma once

namespace bgm::cli {

/// Entry point for the `bgm` binary: subcommands train, predict, eval,
/// render, verify. Returns the process exit code (0 ok, 1 runtime failure,
/// 2 usage/config error).
int run(int argc, const char* const* argv);

}  // namespace bgm::cli
