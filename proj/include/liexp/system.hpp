#ifndef LIEXP_SYSTEM_HPP
#define LIEXP_SYSTEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "liexp/exp_poly.hpp"
#include "liexp/reference.hpp"

namespace liexp {

// A linear system dU/dt = A(t) U with A(t) = A0 + sum_n eps^n A_n(t),
// each A_n an exponential-polynomial matrix over a shared frequency basis.
struct SystemSpec {
  int dim = 0;
  ComplexMatrix a0;                  // constant part (zero matrix allowed)
  std::vector<ExpPolyMatrix> terms;  // terms[n-1] = A_n(t)
  double epsilon = 1.0;              // default strength, overridable per run
  std::optional<double> period;
  bool skew_hermitian = false;
  BasisPtr basis;
  std::string name = "custom";

  const ExpPolyMatrix& term(int n) const;  // 1-based, n <= int(terms.size())
};

struct BuiltinParams {
  double beta = 1.0;
  double omega = 0.0;  // 0 = system default
  double omega0 = 1.0;
};

// name in {three-lambda-periodic, three-lambda-qp, bloch-siegert}.
SystemSpec builtin_system(const std::string& name, const BuiltinParams& params = {});

// Enforces the declared invariants: shapes, basis consistency, skew-Hermiticity
// of A0 and of ep_eval(A_n, t) at sampled t, and (if period is set) that every
// stored mode is commensurate with 2*pi/T. Throws ConfigError on violation.
void validate_system(const SystemSpec& sys);

// A(t) at numerical epsilon.
ComplexMatrix eval_generator(const SystemSpec& sys, double epsilon, double t);
GeneratorFn generator_fn(const SystemSpec& sys, double epsilon);

// All of A(t) folded into a single exponential-polynomial matrix (A0 enters
// the zero mode, A_n scaled by epsilon^n).
ExpPolyMatrix full_generator_poly(const SystemSpec& sys, double epsilon);

// JSON serialization. Schema: {dim, frequencies: [..], A0: {re, im},
// terms: [{order, modes: [{k, rho, power, re, im}]}], skew_hermitian, period?}.
// With hamiltonian = true the loaded matrices are multiplied by -i (the file
// then holds H(t) rather than A(t) = -i H(t)).
SystemSpec system_from_json(const std::string& text, bool hamiltonian = false);
std::string system_to_json(const SystemSpec& sys);
SystemSpec load_system(const std::string& path, bool hamiltonian = false);
void save_system(const SystemSpec& sys, const std::string& path);

}  // namespace liexp

#endif
