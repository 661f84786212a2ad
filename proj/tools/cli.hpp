#pragma once

#include <iosfwd>

namespace wacrisk::cli {

/// Exit codes: 0 success, 1 unexpected failure, 2 invalid input, 3 no answer
/// exists (unstable configuration, empty feasible set, diverging integral).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wacrisk::cli
