#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smolu {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (nonpositive size, etc).
class DomainError : public Error {
 public:
  using Error::Error;
};

// rho outside the window (max(b,0),1) or rho + a <= 0.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

// Improper moment integral that does not converge.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Exponential step would overflow (dt * sup|a| too large).
class StepError : public Error {
 public:
  using Error::Error;
};

class CflError : public Error {
 public:
  using Error::Error;
};

class InsufficientRangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Error carrying a numeric history (Picard distances, residual trace, ...).
class TracedError : public Error {
 public:
  TracedError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

// Picard distances stopped decreasing; the caller has to shrink T.
class NoContractionError : public TracedError {
 public:
  using TracedError::TracedError;
};

class NonConvergenceError : public TracedError {
 public:
  using TracedError::TracedError;
};

// Fixed-point sweep whose update norm keeps growing.
class IterationDivergenceError : public TracedError {
 public:
  using TracedError::TracedError;
};

}  // namespace smolu
