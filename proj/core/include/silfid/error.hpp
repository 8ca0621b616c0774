#pragma once

#include <stdexcept>
#include <string>

namespace silfid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stance label could not be mapped onto the five-level ordinal scale.
class StanceCodingError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-contract input (bad files, violated preconditions).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Two panels (or matrices) could not be put on a common id basis.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// A statistic is undefined on the given data (too few points, zero variance).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace silfid
