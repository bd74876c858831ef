#pragma once

#include <stdexcept>
#include <string>

namespace nucc {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Integration aborted because the state norm crossed the overflow cap (or the
// step size collapsed while the norm was exploding). Carries the time at which
// growth became unrepresentable.
class GrowthOverflowError : public Error {
 public:
  GrowthOverflowError(const std::string& what, double t)
      : Error(what), blow_up_time(t) {}
  double blow_up_time;
};

// An iteration stopped without reaching its tolerance; `gap` is the last
// measured convergence gap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double g) : Error(what), gap(g) {}
  double gap;
};

// Backward Riccati integration blew up; usually means the shift L is too
// aggressive for the plant.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double t)
      : Error(what), blow_up_time(t) {}
  double blow_up_time;
};

class PreconditionError : public Error {
  using Error::Error;
};

// Malformed input files, scenario JSON, expression syntax. CLI maps this to
// exit code 2.
class SchemaError : public Error {
  using Error::Error;
};

class UnsupportedError : public Error {
  using Error::Error;
};

// Quadrature exhausted its subdivision budget before reaching the requested
// tolerance. Carries the error estimate it did achieve so callers can decide
// whether the result is still usable.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double est)
      : Error(what), achieved(est) {}
  double achieved;
};

// Gramian too ill-conditioned to invert (eig_min/eig_max at or below the
// invertibility floor).
class SingularGramianError : public Error {
 public:
  SingularGramianError(const std::string& what, double ratio)
      : Error(what), eig_ratio(ratio) {}
  double eig_ratio;
};

}  // namespace nucc
