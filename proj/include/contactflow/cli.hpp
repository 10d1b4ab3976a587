#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace contactflow::cli {

// Runs one subcommand; args excludes the program name.  Returns the
// process exit code: 0 success, 1 usage error, 2 numeric/domain failure,
// 3 check-suite failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace contactflow::cli
