#pragma once

#include <string>
#include <vector>

namespace gfl::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kRuntimeError = 3 };

/// Entry point shared by the executable and the tests. Never throws.
int run(const std::vector<std::string>& args);

}  // namespace gfl::cli
