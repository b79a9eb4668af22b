/**
 * @file cli.hpp
 * @brief Command-line front end; `run` is the whole program minus process setup.
 */
#pragma once

#include <ostream>

namespace cubicwave::cli {

/// Exit codes: 0 success, 1 computation or I/O failure (a diagnostic JSON is
/// written), 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cubicwave::cli
