#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gsindy::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// One invocation of the tool, e.g. {"gridsearch", "--config", "run.cfg", "--jobs", "4"}.
/// The program name is not part of `args`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gsindy::cli
