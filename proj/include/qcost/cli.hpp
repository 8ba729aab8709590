#pragma once

namespace qcost {

// Parses argv and runs one subcommand. Returns the process exit code:
// 0 success, 2 usage error, 1 runtime failure.
int dispatch(int argc, const char* const* argv);

}  // namespace qcost
