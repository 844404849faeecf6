#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tubelink::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kValidationError = 2,
  kInternalError = 3,
};

/// Runs one invocation; args excludes the program name. Subcommands: link,
/// score, eval, curves, gen.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tubelink::cli
