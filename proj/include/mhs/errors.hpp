#pragma once

#include <stdexcept>
#include <string>

namespace mhs {

// Base class for all solver errors so drivers can map them to exit codes.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input validation failures (exit code 1 in the CLI).
class ValidationError : public SolverError {
 public:
  using SolverError::SolverError;
};

class CompatibilityViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SmallnessViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SymmetryViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numerical failures during a run (exit code 2 in the CLI).
class NumericalError : public SolverError {
 public:
  using SolverError::SolverError;
};

class FieldTooLarge : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InversionFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SliceMeanViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NeumannDivergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PathDependence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace mhs
