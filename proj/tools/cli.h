#ifndef DYADSCREEN_TOOLS_CLI_H_
#define DYADSCREEN_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace dyadscreen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Runs one command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace dyadscreen::cli

#endif  // DYADSCREEN_TOOLS_CLI_H_
