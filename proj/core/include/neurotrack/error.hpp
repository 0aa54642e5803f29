#pragma once

#include <stdexcept>
#include <string>

namespace neurotrack {

// Base for all library errors. Callers that only need a message can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something unusable: bad arguments, inconsistent shapes,
// out-of-range windows, unknown names.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// File missing, unreadable, or unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

// File exists but its contents do not parse.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure cannot produce a meaningful result
// (singular system, degenerate channel, zero-variance sample).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace neurotrack
