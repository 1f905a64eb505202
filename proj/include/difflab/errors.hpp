#pragma once

#include <stdexcept>
#include <string>

namespace difflab {

// Thrown when a quadrature or series evaluation fails to reach the requested
// tolerance; carries the tolerance that was actually achieved.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double achieved_tol)
      : std::runtime_error(what), achieved_tolerance(achieved_tol) {}
  double achieved_tolerance;
};

// A reverse chain produced a non-finite or absurdly large state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what), step_index(step) {}
  long step_index;
};

// A search exceeded its iteration budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A stepsize (or a per-step contraction factor) violates the admissibility
// conditions the convergence bound requires.
class AdmissibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace difflab
