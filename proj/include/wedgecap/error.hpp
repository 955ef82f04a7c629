#pragma once

#include <stdexcept>
#include <string>

namespace wedgecap {

enum class ErrorCode {
  InvalidArgument,    // precondition / domain violation
  MalformedInput,     // unparsable or structurally invalid input file
  NotSelfSimilar,     // profile lacks the claimed multiplicative periodicity
  DegenerateTriangle, // collinear comparison triangle
  InfeasibleScan,     // no admissible fan size below pi - step
  SolverFailure,      // singular Jacobian or unsolvable data
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace wedgecap
