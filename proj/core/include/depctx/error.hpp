#pragma once

#include <stdexcept>
#include <string>

namespace depctx {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: unusable configuration, unknown bag label, missing path.
// The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk data (vector files, datasets, manifests, cache records).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Raised when a correlation is undefined: fewer than two points or a
// constant input.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

}  // namespace depctx
