#pragma once

#include <stdexcept>
#include <string>

namespace vw {

/// Base class of every error raised by the solver.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples declared even (odd) carry more than the tolerated odd (even) energy.
class ParityViolation : public Error {
 public:
  using Error::Error;
};

/// A kernel was evaluated at (or numerically at) its singular point.
class SingularEvaluation : public Error {
 public:
  using Error::Error;
};

/// The interface came within the guard distance of a vortex center.
class VortexTooClose : public Error {
 public:
  using Error::Error;
};

/// A fluid layer became thinner than the gap floor.
class DegenerateStrip : public Error {
 public:
  using Error::Error;
};

class LinearSolveFailure : public Error {
 public:
  using Error::Error;
};

class PointOutsideLayer : public Error {
 public:
  using Error::Error;
};

class NonFiniteEntry : public Error {
 public:
  using Error::Error;
};

class NewtonFailure : public Error {
 public:
  using Error::Error;
};

class SingularBorderedSystem : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text. The message carries line and key context.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Configuration that parses but violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace vw
