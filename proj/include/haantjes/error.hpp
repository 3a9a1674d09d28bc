#pragma once

#include <stdexcept>
#include <string>

namespace haantjes {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text; `position` is a 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  int position() const { return position_; }

 private:
  int position_;
};

/// Runtime failure while evaluating an expression (pole hit).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Shapes, charts or indices that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A construction that cannot be carried out for the given input.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace haantjes
