#pragma once

#include <string>
#include <vector>

namespace hyprl::cli {

// Entry point behind the hyprl binary; also callable in-process from tests.
// Returns the process exit code: 0 success, 1 runtime/I-O failure, 2 usage.
int run(const std::vector<std::string>& args);

}  // namespace hyprl::cli
