#pragma once

#include <string>
#include <vector>

namespace qbag {

// Entry point behind the qbag_bench binary.  Exit codes: 0 success,
// 1 runtime failure, 2 usage errors (unknown subcommand, bad flags).
int cli_main(int argc, const char* const* argv);

// Convenience overload; args exclude the program name.
int cli_main(const std::vector<std::string>& args);

}  // namespace qbag
