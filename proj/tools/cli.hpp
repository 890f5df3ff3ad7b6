#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace obsopt::cli {

//! Exit codes of run().
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_data = 2;

//! Runs one subcommand. `args` excludes the program name. Results that are
//! not redirected to a file go to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

} // namespace obsopt::cli
