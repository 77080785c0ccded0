#pragma once

#include <stdexcept>
#include <string>

namespace nvote {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input (calibration, labels, detections, config).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Malformed binary input or unsupported encoding.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input whose values break a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace nvote
