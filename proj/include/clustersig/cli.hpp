#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clustersig::cli {

// Entry point of the `clustersig` tool. args excludes the program name.
// Returns the process exit code: 0 success, 1 when a dataset failed
// entirely, 2 on usage or argument errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clustersig::cli
