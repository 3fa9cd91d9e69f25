#pragma once

#include <stdexcept>
#include <string>

namespace tdhfc {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A nominally Hermitian matrix produced a real representation with a
// non-negligible imaginary part.
class ImagResidue : public Error {
 public:
  using Error::Error;
};

class EigenFailure : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class NearSingularOverlap : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

// A conserved quantity drifted past ten times its tolerance during
// propagation; usually means the time step is too large.
class InvariantBreach : public Error {
 public:
  InvariantBreach(int step, const std::string& what)
      : Error("invariant breach at step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

class NoConvergedRuns : public Error {
 public:
  using Error::Error;
};

}  // namespace tdhfc
