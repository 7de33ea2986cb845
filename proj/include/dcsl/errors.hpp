#pragma once

#include <stdexcept>
#include <string>

namespace dcsl {

// Exit-code contract: 0 success, 2 input error, 3 numerical
// non-convergence, 4 infeasibility.
class Error : public std::runtime_error {
 public:
  Error(const std::string& msg, int exit_code)
      : std::runtime_error(msg), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

// Malformed files, missing fields, invariant violations on user data.
class InputError : public Error {
 public:
  explicit InputError(const std::string& msg) : Error(msg, 2) {}
};

// Arguments outside an operation's domain (E < 1, non-positive counts, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg, 2) {}
};

// Non-finite intermediates, overflow.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg, 3) {}
};

// An optimizer failed to converge or a fit is unidentifiable.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& msg) : Error(msg, 3) {}
};

// A requested point lies outside the feasible set (no crossover in
// bracket, compute too small for one epoch, ...).
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& msg) : Error(msg, 4) {}
};

}  // namespace dcsl
