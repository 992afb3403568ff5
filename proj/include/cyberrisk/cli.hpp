#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cyberrisk {

/// Exit codes: 0 success, 1 invalid input or usage, 2 computation failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a of `canonical`, as 16 lowercase hex digits.
std::string settings_hash(const std::string& canonical);

}  // namespace cyberrisk
