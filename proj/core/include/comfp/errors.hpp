#ifndef COMFP_ERRORS_HPP_
#define COMFP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace comfp {

// Failure to read, write, or parse an external file. CLI exit code 1.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// A data invariant does not hold (disjoint layers, bad fractions,
// infeasible sampling requests, mismatched lengths). CLI exit code 2.
class InvariantViolation : public std::runtime_error {
 public:
  explicit InvariantViolation(const std::string& msg)
      : std::runtime_error(msg) {}
};

// Non-finite values or a numeric routine that cannot proceed. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace comfp

#endif  // COMFP_ERRORS_HPP_
