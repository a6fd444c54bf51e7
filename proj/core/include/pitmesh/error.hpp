#pragma once

#include <stdexcept>
#include <string>

namespace pitmesh {

// Base for every failure raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps ValidationError to exit 1 and
// everything else to exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: config keys, values that violate a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

// A cell with non-positive signed area.
class InvertedElementError : public GeometryError {
 public:
  InvertedElementError(int cell, const std::string& what)
      : GeometryError(what), cell_(cell) {}
  int cell() const noexcept { return cell_; }

 private:
  int cell_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// exp() argument in Butler-Volmer beyond the representable range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pitmesh
