#pragma once

#include <stdexcept>
#include <string>

namespace lop {

// Base for all recoverable errors raised by the library. The CLI maps these to
// exit code 1; internal invariant breaches use logic_error instead.
struct LopError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : LopError {
  int line = 0, col = 0;
  ParseError(const std::string& msg, int line_, int col_)
      : LopError("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
        line(line_), col(col_) {}
};

// Construct from a foreign calculus (e.g. ! in a cbv term) or a broken side
// condition (non-affine bang term at an input boundary).
struct CalcError : LopError {
  using LopError::LopError;
};

// Probability out of range or total mass exceeding 1.
struct MassError : LopError {
  using LopError::LopError;
};

// A redex handed to apply_redex / lift_step that the term does not actually have.
struct InvalidRedex : LopError {
  using LopError::LopError;
};

}  // namespace lop
