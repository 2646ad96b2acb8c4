#pragma once

#include <iosfwd>

namespace exprlab {

// Entry point of the exprlab binary. Returns 0 on success, 2 on command-line
// errors and 1 on runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace exprlab
