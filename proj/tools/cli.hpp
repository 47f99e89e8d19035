#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace scin::cli {

/// Runs the `scin` command line (args exclude the program name) and returns
/// the process exit code:
///   0 success, 1 usage, 2 config, 3 ingest, 4 divergence, 5 io,
///   6 corrupt checkpoint.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scin::cli
