#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sonarsnoop::cli {

// Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sonarsnoop::cli
