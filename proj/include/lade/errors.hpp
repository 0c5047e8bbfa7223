#pragma once

#include <stdexcept>
#include <string>

namespace lade {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or rank mismatch between operands.
struct DimensionError : Error {
  using Error::Error;
};

// Bad scalar argument (negative dilation, empty grid, alpha outside [0,1], ...).
struct ParameterError : Error {
  using Error::Error;
};

// Invalid or inconsistent configuration (file or struct level).
struct ConfigError : Error {
  using Error::Error;
};

// Filesystem, format, or checksum failure.
struct IoError : Error {
  using Error::Error;
};

// Non-finite value where one is required.
struct ValueError : Error {
  using Error::Error;
};

}  // namespace lade
