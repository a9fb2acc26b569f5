#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mfgame::cli {

// Parses and runs one command line. Returns the process exit code; diagnostics go
// to `err`, results that are not written to files go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfgame::cli
