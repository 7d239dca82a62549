#ifndef RISKROUTE_CLI_HPP
#define RISKROUTE_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace riskroute {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

// Default directory for generated files when --out is not given.
inline constexpr const char* kOutDirEnv = "RISKROUTE_OUT_DIR";

// Entry point of the riskroute tool; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace riskroute

#endif
