#pragma once

#include <string>
#include <vector>

namespace tbw::cli {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace tbw::cli
