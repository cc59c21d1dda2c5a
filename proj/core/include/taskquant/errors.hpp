#pragma once

#include <stdexcept>
#include <string>

namespace tq {

/// Bad user input: malformed config files, unknown method names, invalid flags.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A requested design cannot exist under the resolution/dimension constraints
/// (e.g. fewer than two levels per scalar quantizer).
class infeasible_error : public std::runtime_error {
 public:
  explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-finite inputs, near-singular matrices, solver
/// convergence failures.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem failure, always carries the offending path in the message.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tq
