#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace camel::cli {

// Process exit codes, one per failure class.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,        // unclassified error
  kUsage = 2,          // unknown flag, missing or malformed argument
  kIo = 3,             // missing or unreadable file
  kIncompatible = 4,   // checkpoint does not match the model
  kFormat = 5,         // corrupt binary or text file
  kConfig = 6,         // invalid configuration
  kDiverged = 7,       // non-finite training loss
  kData = 8,           // data inconsistent with the model or vocabulary
  kCheckFailed = 9,    // gradcheck ran but did not pass
};

/// Runs one `camel` subcommand. `args` excludes the program name. Normal
/// output goes to `out`; failures print a single diagnostic line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace camel::cli
