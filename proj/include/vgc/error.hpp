#pragma once

#include <stdexcept>
#include <string>

namespace vgc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or configuration supplied by the caller.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Incompatible layer shapes in a model description.
class SpecError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

// Malformed or truncated container file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training or inference.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Broken structural invariant (empty graph, out-of-range edge, empty segment).
class StructuralError : public Error {
 public:
  using Error::Error;
};

}  // namespace vgc
