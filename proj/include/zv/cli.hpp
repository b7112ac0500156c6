#pragma once

#include <string>
#include <vector>

namespace zv {

// Routes to the train / datagen / eval / inspect subcommands. Exit codes:
// 0 success, 1 validation error, 2 runtime failure.
int dispatch(const std::vector<std::string>& args);

}  // namespace zv
