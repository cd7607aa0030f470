#pragma once

#include <stdexcept>
#include <string>

namespace bijmap {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chain, face or mesh violates a combinatorial invariant.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Malformed or degenerate input data (source faces, placements, files).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range numeric parameter (K <= 1, empty polygon, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The query point lies on the image of the cycle; the degree is undefined.
class DegreeUndefinedError : public Error {
 public:
  using Error::Error;
};

/// An operation was called without its precondition holding.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Boundary topology outside what the certifiers handle (more than one loop).
class UnsupportedTopologyError : public Error {
 public:
  using Error::Error;
};

/// A similarity part too small to define a rotation.
class DegenerateFrameError : public Error {
 public:
  using Error::Error;
};

/// File-level failure, carrying the 1-based line number when known (0 otherwise).
class LoadError : public Error {
 public:
  LoadError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace bijmap
