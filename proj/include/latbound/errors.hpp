#pragma once

#include <stdexcept>
#include <string>

namespace latbound {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments outside an operation's domain: an energy inside the essential
/// spectrum, a malformed torus point, an off-grid quasimomentum.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidCoupling : public DomainError {
 public:
  InvalidCoupling() : DomainError("coupling must be nonzero") {}
  using DomainError::DomainError;
};

class GridError : public DomainError {
 public:
  using DomainError::DomainError;
};

class SizeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// z is outside the essential spectrum but on the side where the channel
/// determinant is not positive, so the Birman-Schwinger kernel is undefined.
class InvalidEnergy : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An integrand returned a non-finite value at a quadrature node.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::string node)
      : Error(what + " at node " + node), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

/// A numerical procedure (root bracketing, eigen iteration) did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class BracketError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// The Birman-Schwinger eigenvalue stays below one up to the essential edge
/// at the finest discretization tried.
class UnresolvedBoundState : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace latbound
