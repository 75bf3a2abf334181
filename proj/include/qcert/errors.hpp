#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qcert {

// Input violates a documented precondition (shape, Hermiticity, parameter range).
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// An iterative numerical kernel did not converge within its budget.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// The exact operational distance was requested beyond the power-set cutoff.
class CutoffError : public std::invalid_argument {
public:
  explicit CutoffError(const std::string& what) : std::invalid_argument(what) {}
};

// A per-outcome hypothesis of a distance bound does not hold.
class OutcomePreconditionError : public ValidationError {
public:
  OutcomePreconditionError(const std::string& what, std::size_t outcome)
      : ValidationError(what), outcome_(outcome) {}
  std::size_t outcome() const { return outcome_; }

private:
  std::size_t outcome_;
};

} // namespace qcert
