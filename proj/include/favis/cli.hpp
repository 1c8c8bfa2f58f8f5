#pragma once

#include <ostream>

namespace favis {

/// Entry point of the `favis` tool. Exit codes: 0 success, 1 a module error
/// (its name is printed), 2 bad usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace favis
