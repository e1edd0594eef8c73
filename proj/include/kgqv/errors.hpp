#pragma once

#include <stdexcept>
#include <string>

namespace kgqv {

/// Evaluation outside a function's domain, or a stencil leaving the simulated window.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Lattice or noise index out of range.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Inconsistent inputs: noise on the wrong grid, window mismatch, bad parameters.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fields that are supposed to share one noise realization do not.
class CouplingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Increment too large for the point at which a kernel difference is evaluated.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The diffusion coefficient vanishes on every observation point.
class DegenerateCoefficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value produced by a simulation or statistic.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kgqv
