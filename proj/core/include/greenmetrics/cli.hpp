#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace greenmetrics::cli {

// Full command-line surface: estimate, sweep, telemetry, score, report.
// Results go to `out`, diagnostics to `err` as single lines prefixed
// "error:". Exit codes: 0 success, 1 usage error, 2 input parse error,
// 3 validation/invariant error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace greenmetrics::cli
