#pragma once

#include <stdexcept>
#include <string>

namespace tacnode {

// Violated precondition on user-supplied input (maps to CLI exit code 2).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical breakdown: overflow, singular resolvent, degenerate estimator
// (maps to CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DomainError(what);
}

}  // namespace tacnode
