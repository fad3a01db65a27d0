#pragma once

#include <stdexcept>
#include <string>

namespace compactlab {

/// A precondition on an argument was violated (bad step size, index, shape...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A modelling contract was violated while computing (e.g. negative potential).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The requested combination has no supported algorithm (e.g. no closed-form
/// heat semigroup for an inner oracle).
class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw ArgumentError(what);
}
}  // namespace detail

}  // namespace compactlab
