#ifndef LIEXP_PROPAGATOR_HPP
#define LIEXP_PROPAGATOR_HPP

#include <vector>

#include "liexp/expansion.hpp"
#include "liexp/matrix_core.hpp"

namespace liexp {

// What to keep of U(t) = prefix * exp(sum eps^n Omega_n(t)) * core(t).
enum class AssembleMode {
  Full,           // everything
  EffectiveOnly,  // prefix * core: the flow of the effective generator alone
  GeneratorOnly,  // exp(sum eps^n Omega_n(t)) alone (the Dyson series factor
                  // I + sum eps^n P_n(t) for standard perturbation)
};

AssembleMode assemble_mode_from_string(const std::string& s);

// Evaluate the approximate propagator of one expansion at time t.
ComplexMatrix assemble(const ExpansionSeries& series, double t, double eps,
                       AssembleMode mode = AssembleMode::Full);

struct PropagationResult {
  std::vector<double> grid;
  std::vector<ComplexMatrix> u;
  std::vector<double> p;       // |U_ij|^2 along the grid
  std::vector<double> defect;  // ||U^H U - I||_2 along the grid
  Method method{};
  bool interaction_picture = false;
  int obs_i = 1, obs_j = 1;  // 1-based observable indices
  double epsilon = 0.0;
};

// Sample the assembled propagator on a strictly increasing grid. i and j are
// 1-based row/column indices of the reported transition probability.
PropagationResult propagate(const ExpansionSeries& series, const std::vector<double>& grid,
                            double eps, int i, int j, AssembleMode mode = AssembleMode::Full);

double transition_probability(const ComplexMatrix& u, int i, int j);  // 1-based
double unitarity_defect(const ComplexMatrix& u);

// |P - P_ref| pointwise against independently computed propagator samples.
std::vector<double> error_curve(const PropagationResult& result,
                                const std::vector<ComplexMatrix>& reference);

}  // namespace liexp

#endif
