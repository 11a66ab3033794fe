#pragma once

#include <stdexcept>
#include <string>

namespace fmx {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the documented domain (dimension, order, index...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An input object violates an invariant it must carry (Hermiticity, norm).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed or drifted beyond its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A convergence analysis could not produce a result from the data.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

/// A closed-form oracle was evaluated at a singular point.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fmx
