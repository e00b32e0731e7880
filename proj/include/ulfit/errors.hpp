#pragma once

#include <stdexcept>
#include <string>

namespace ulfit {

// Invalid input data or configuration (CLI exit code 2).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken mesh geometry (degenerate triangles, non-conforming topology).
class GeometryError : public ValidationError {
public:
  explicit GeometryError(const std::string& msg) : ValidationError(msg) {}
};

// Solver breakdown or degenerate numerical data (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ulfit
