#ifndef RLMUT_ERROR_HPP_
#define RLMUT_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rlmut {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed configs, out-of-range hyperparameters, shape mismatches.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition (e.g. stepping a terminal state).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A non-finite value showed up in a numerical kernel.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::int64_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}

  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

// A pipeline phase needs an artifact that has not been produced yet.
class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

}  // namespace rlmut

#endif  // RLMUT_ERROR_HPP_
