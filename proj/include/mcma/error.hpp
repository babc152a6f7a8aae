#pragma once

#include <stdexcept>
#include <string>

namespace mcma {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something malformed: bad shapes, out-of-range values,
// invalid topologies or configs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Named entity (benchmark, file, pipeline) does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Numerical failure during training (non-finite loss or gradient).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcma
