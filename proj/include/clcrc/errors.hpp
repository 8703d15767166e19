#pragma once

#include <stdexcept>
#include <string>

namespace clcrc {

/// Malformed or inconsistent input data (CSV rows, envelopes, configs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Backend failure, infeasibility or missing solver.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments supplied by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace clcrc
