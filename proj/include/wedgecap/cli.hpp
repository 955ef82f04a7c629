#pragma once

#include <iosfwd>

namespace wedgecap::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,          // bad flags, unknown case tag, invalid parameter combination
  kBadInput = 2,       // missing or malformed input file, unwritable output
  kOutOfRange = 3,     // numeric value outside its documented range
  kInfeasible = 4,     // no admissible fan size found by the beta scan
  kVerifyFailed = 5,   // verify-examples reported a FAIL
  kNotConverged = 6,   // solver did not converge (artifacts are still written)
};

/// Runs one subcommand (profile, bounds, verify-examples, solve, blowup).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wedgecap::cli
