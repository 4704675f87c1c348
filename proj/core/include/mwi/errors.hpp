#pragma once

#include <stdexcept>
#include <string>

namespace mwi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad arguments, malformed files, inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure of a numerical kernel (singular operator, non-finite iterate).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mwi
