#pragma once

#include <stdexcept>
#include <string>

namespace nodalfreq {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The network description is malformed or violates a modelling precondition.
class NetworkError : public Error {
 public:
  using Error::Error;
};

/// The network file could not be parsed.
class ParseError : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

/// Generators violate the equal-T / proportional J:D:K requirement of modal analysis.
class HomogeneityError : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

/// A numerical invariant failed (singular block, eigenvalue sign, convention mismatch).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The time-domain integration left its admissible state bound.
class SimulationError : public NumericalError {
 public:
  SimulationError(const std::string& what, double time) : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace nodalfreq
