#pragma once

#include <iosfwd>

namespace hdpca {

/// Entry point behind the hdpca executable. Returns the process exit code:
/// 0 success, 2 input error, 3 numeric failure, 4 regime violation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hdpca
