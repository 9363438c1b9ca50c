#pragma once

// The costorch command line: validate, train, tune, predict, schedule,
// report, gen and oracle. Documents go to --out or `out`; diagnostics go
// to `err`.

#include <iosfwd>
#include <string>
#include <vector>

namespace costorch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;  // infeasible, invalid problem, solver gave up
inline constexpr int kExitUsage = 2;   // bad flags, unreadable or malformed input

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace costorch::cli
