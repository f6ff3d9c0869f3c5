#pragma once

#include <stdexcept>
#include <string>

namespace isosand {

/// Argument outside the mathematical domain of an operation (e.g. k >= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation too close to a real pole of an elliptic ratio.
class PoleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph construction or lift inconsistency (degenerate multigrid, holonomy).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative method failed to converge, or a root could not be bracketed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sandpile shape reached the margin of the patch.
class RegionTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checked identity or inequality did not hold.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace isosand
