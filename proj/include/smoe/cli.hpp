#pragma once

#include <string>
#include <vector>

namespace smoe {

// Command-line entry point. Subcommands: denoise, bench, demo1d, fitblock.
// Exit codes: 0 success, 1 usage error, 2 I/O or format error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace smoe
