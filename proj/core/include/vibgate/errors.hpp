#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vibgate {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different grids or have incompatible sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The grid does not confine the model potential.
class ConfinementError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double worst_residual)
      : Error(what), worst_residual_(worst_residual) {}
  double worst_residual() const noexcept { return worst_residual_; }

 private:
  double worst_residual_;
};

class SpectrumExhaustedError : public Error {
 public:
  using Error::Error;
};

class AmbiguousAssignmentError : public Error {
 public:
  AmbiguousAssignmentError(const std::string& what, double confidence)
      : Error(what), confidence_(confidence) {}
  double confidence() const noexcept { return confidence_; }

 private:
  double confidence_;
};

/// Norm drift beyond tolerance during propagation.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Ill-posed control problem or gate specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A mask would need to amplify outside the reference pulse's support.
class CoverageError : public Error {
 public:
  CoverageError(const std::string& what, double lo_cm, double hi_cm)
      : Error(what), lo_cm_(lo_cm), hi_cm_(hi_cm) {}
  double lo_wavenumber() const noexcept { return lo_cm_; }
  double hi_wavenumber() const noexcept { return hi_cm_; }

 private:
  double lo_cm_;
  double hi_cm_;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vibgate
