#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maxent_tail::cli {

/// Exit codes: 0 success, 1 numeric or infeasibility error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maxent_tail::cli
