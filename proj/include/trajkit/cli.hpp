#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trajkit::cli {

/// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
/// 3 numerical failure. Errors print one `error kind=<kind> msg=<text>` line
/// on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace trajkit::cli
