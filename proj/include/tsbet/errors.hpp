#pragma once

#include <stdexcept>
#include <string>

namespace tsbet {

// Invalid parameters, out-of-range actions and incompatible variants.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A divergence (or a moment defining one) is infinite.
class InfiniteDivergence : public DomainError {
 public:
  using DomainError::DomainError;
};

// Numerical solver failed: bracketing, non-convergence, infeasible equation.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The EDO equation has no root for the requested timescale.
class NoSolution : public SolverError {
 public:
  NoSolution(const std::string& what, double min_timescale)
      : SolverError(what), min_timescale_(min_timescale) {}
  // Every timescale strictly above this value admits a solution.
  double min_timescale() const noexcept { return min_timescale_; }

 private:
  double min_timescale_;
};

class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : SolverError(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace tsbet
