#pragma once

#include <exception>
#include <ostream>

namespace molldeconv::cli {

/// Runs one command line. Exit codes: 0 success, 1 usage or input error, 2 numerical contract breach.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Exit code for an exception escaping a command.
int exit_code(const std::exception& e);

}  // namespace molldeconv::cli
