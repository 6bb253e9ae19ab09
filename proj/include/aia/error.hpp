#pragma once

#include <stdexcept>
#include <string>

namespace aia {

/// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or missing configuration (unknown key, unresolvable path, missing seed).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (manifests, images, feature files, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch between parameters and inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values during training or evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace aia
