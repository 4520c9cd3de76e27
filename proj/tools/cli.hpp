#pragma once

#include <ostream>

namespace mapminer::cli {

/// Runs the mapminer command line. Exit status: 0 ok, 1 data or I/O error,
/// 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mapminer::cli
