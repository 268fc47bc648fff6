#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plsq {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 when input fails validation or a command fails, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace plsq
