#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qcfb::cli {

/// Runs one invocation; `args` excludes the program name. Returns the exit
/// status: 0 all verdicts pass, 1 a verdict failed, 2 input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qcfb::cli
