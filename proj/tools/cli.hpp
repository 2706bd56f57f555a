#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace idg::cli {

// Runs one `idg` invocation. `args` excludes the program name. Interactive
// input (play) is read from `in`. Returns the process exit status:
// 0 success, 1 domain error, 2 usage error.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace idg::cli
