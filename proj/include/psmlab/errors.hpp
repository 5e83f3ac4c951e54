#pragma once

#include <stdexcept>
#include <string>

namespace psmlab {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad scenario / strategy configuration (wrong keys, forbidden combinations).
class SpecError : public Error {
public:
  using Error::Error;
};

// Design matrix is rank deficient.
class SingularDesignError : public Error {
public:
  using Error::Error;
};

// Logistic likelihood has no finite maximizer (complete or quasi separation).
class SeparationError : public Error {
public:
  using Error::Error;
};

// Iterative fit ran out of iterations without meeting tolerance.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

// Intercept calibration (treatment or missingness) failed to bracket or converge.
class CalibrationError : public Error {
public:
  using Error::Error;
};

// All propensity scores identical: caliper width would be zero.
class DegenerateCaliperError : public Error {
public:
  using Error::Error;
};

// Analysis set too small to proceed (e.g. complete-case treated count).
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

// An imputation chain's model failed (carries the chain index in the message).
class ImputationError : public Error {
public:
  using Error::Error;
};

// Runtime failure of a scenario (excessive replicate failures, bad output dir).
class ExecutionError : public Error {
public:
  using Error::Error;
};

// File / serialization problems.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace psmlab
