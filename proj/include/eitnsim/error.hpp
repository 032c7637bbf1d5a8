#pragma once

#include <stdexcept>
#include <string>

namespace eitnsim {

/// Invalid or inconsistent user configuration (bad key, bad value).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input that violates a documented precondition (non-unit vectors, ...).
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside a solve or propagation.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operation requested on a level scheme that does not support it.
class UnsupportedModeError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace eitnsim
