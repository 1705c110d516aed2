#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scenecloak {

/// Command-line entry point. `args` excludes the program name.
/// Returns 0 on success, 1 on usage or validation errors, 2 on runtime and
/// protocol errors.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace scenecloak
