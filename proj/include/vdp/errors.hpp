#pragma once

#include <stdexcept>
#include <string>

namespace vdp {

// Rejected input: bad arguments, malformed configs, domain violations.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Requested run exceeds a configured capacity limit (table entries,
// enumeration cap).
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or other numerical breakdown during a solve.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vdp
