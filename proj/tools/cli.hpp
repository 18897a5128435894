#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace magnetolab::cli {

enum ExitCode { ok = 0, verification_failed = 1, config_error = 2, numerical_error = 3 };

// Runs one subcommand. Results go to `out` (or the files named by --out),
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace magnetolab::cli
