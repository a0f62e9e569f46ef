#pragma once

#include <stdexcept>
#include <string>

namespace thintube {

/// Invalid user input: bad configuration values, malformed files, violated
/// preconditions that a caller can fix.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergent solves, irregular curves at quadrature
/// nodes, singular evaluations.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Parse failure with file and line context.
struct ParseError : InputError {
  ParseError(const std::string& path, long line, const std::string& what)
      : InputError(path + ":" + std::to_string(line) + ": " + what),
        path(path),
        line(line) {}
  std::string path;
  long line;
};

}  // namespace thintube
