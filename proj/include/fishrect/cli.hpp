#pragma once

#include <iosfwd>

namespace fishrect {

/// Exit status: 0 success, 1 usage error or invalid input, 2 runtime failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fishrect
