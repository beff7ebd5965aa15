#pragma once

#include <stdexcept>
#include <string>

namespace circpdo {

// Error taxonomy. Everything thrown by the library derives from Error so the
// CLI can map failures to exit codes in one place.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Violated mathematical precondition (rank mismatch, bad depth, ...).
class PreconditionError : public Error {
public:
  using Error::Error;
};

// Principal part singular at a quadrature point; carries the point.
class EllipticityError : public Error {
public:
  EllipticityError(const std::string& what, double grid_point)
      : Error(what), grid_point(grid_point) {}
  double grid_point;
};

// Inversion refused; carries the condition estimate.
class SingularMatrixError : public Error {
public:
  SingularMatrixError(const std::string& what, double condition)
      : Error(what), condition(condition) {}
  double condition;
};

// Iterative procedure stopped short of the requested tolerance; carries the
// residual actually achieved.
class ToleranceError : public Error {
public:
  ToleranceError(const std::string& what, double achieved)
      : Error(what), achieved(achieved) {}
  double achieved;
};

// A threshold fell inside a singular value cluster; caller must adjust it.
class ClusterError : public Error {
public:
  using Error::Error;
};

// Malformed input document.
class ParseError : public Error {
public:
  using Error::Error;
};

}  // namespace circpdo
