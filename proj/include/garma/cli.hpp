#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace garma::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Invalid flag combination; mapped to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Entry point of the `garma-rj` command line.
 *
 * Subcommands: simulate, fit, summarize, mc, compare. Exit codes are 0 on
 * success, 2 on usage or validation errors and 1 on runtime failures.
 * Requested tables go to `out`, diagnostics to `err`.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace garma::cli
