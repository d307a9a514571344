#pragma once

#include <string>
#include <vector>

namespace relgraph {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitIoOrConfig = 2;

/// Entry point used by the relgraph binary.
int run_cli(int argc, char** argv);

/// Same, with the program name omitted from args.
int run_cli(const std::vector<std::string>& args);

}  // namespace relgraph
