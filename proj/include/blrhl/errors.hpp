#pragma once

#include <stdexcept>
#include <string>

namespace blrhl {

// Bad input: malformed data, out-of-range settings, inconsistent dimensions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Something went wrong numerically while computing or sampling.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The ARS envelope was exceeded by the target, so the target is not log-concave.
class LogConcavityError : public NumericError {
 public:
  using NumericError::NumericError;
};

// The ARS starting abscissae do not enclose the mode of an unbounded target.
class BracketingError : public NumericError {
 public:
  using NumericError::NumericError;
};

// A chain was stopped after too many consecutive HMC rejections.
class ChainAbortedError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace blrhl
