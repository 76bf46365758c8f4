#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace permtest::cli {

/// Entry point behind the `permtest` executable. `args` excludes the
/// program name. Returns 0 on success (whether or not H0 was rejected),
/// 1 on usage errors and 2 on runtime errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace permtest::cli
