#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "firelog/error.hpp"

namespace firelog::cli {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kParse = 3,
  kGraph = 4,
  kEvaluation = 5,
};

int exit_code_for(Errc code) noexcept;

// Applies FIRELOG_LOG_LEVEL (error, warn, info, debug; default warn). Log
// lines go to stderr.
void configure_logging();

// `args` excludes the program name. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace firelog::cli
