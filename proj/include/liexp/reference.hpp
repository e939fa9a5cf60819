#ifndef LIEXP_REFERENCE_HPP
#define LIEXP_REFERENCE_HPP

#include <functional>
#include <vector>

#include "liexp/matrix_core.hpp"

namespace liexp {

// Right-hand side of dU/dt = A(t) U.
using GeneratorFn = std::function<ComplexMatrix(double)>;

struct ReferenceOptions {
  double tol = 1e-12;       // local error tolerance (used as both abs and rel)
  int max_steps = 2000000;  // hard cap across the whole integration
};

// High-order adaptive integration of dU/dt = A(t) U from t_grid.front() with
// U(t0) = I, producing U at every grid point. The stepper lands exactly on
// each requested time (steps are clipped to the grid), so no interpolation
// error enters the samples. There is no unitarity touch-up of any kind.
//
// Throws ConfigError for a bad grid or a tolerance outside [1e-14, 1e-6],
// StepSizeUnderflowError if the error control drives h below ~4*eps*|t|.
std::vector<ComplexMatrix> reference_propagate(const GeneratorFn& a,
                                               const std::vector<double>& t_grid,
                                               const ReferenceOptions& opts = {});

}  // namespace liexp

#endif
