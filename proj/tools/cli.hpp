#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eotcoloc::cli {

/// Runs one eot-coloc command; `args` excludes the program name.
/// Returns the process exit code: 0 success, 1 invalid input or I/O failure,
/// 2 numerical failure (non-convergence).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Splices `key = value` lines from the file named by --config into `args`
/// as --key value, skipping keys already given on the command line.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args);

}  // namespace eotcoloc::cli
