#ifndef CSCD_CLI_HPP
#define CSCD_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace cscd::cli {

enum ExitCode : int { kSuccess = 0, kValidation = 1, kIo = 2, kNumerical = 3 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "CSCD_OUTPUT_DIR";

/// Runs the command line `args` (args[0] is the program name). Results go to
/// `out`, progress and errors to `err`. Returns one of ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cscd::cli

#endif
