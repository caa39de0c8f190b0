#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hcsim::cli {

/// Exit statuses of the command-line tool.
enum Exit : int {
  kOk = 0,
  kPropertyFailure = 1,
  kUsageError = 2,
};

/// Runs the `hcsim` tool. `args` excludes the program name. Tables go to
/// `out` (or the --out file), summaries and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a processor list: `4`, `1,2,8` or the power-of-two range `1..64`.
std::vector<unsigned> parse_processor_list(const std::string& text);

}  // namespace hcsim::cli
