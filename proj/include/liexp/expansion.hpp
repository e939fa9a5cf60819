#ifndef LIEXP_EXPANSION_HPP
#define LIEXP_EXPANSION_HPP

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "liexp/exp_poly.hpp"
#include "liexp/system.hpp"

namespace liexp {

enum class Method {
  Magnus,
  FloquetMagnus,
  RemovePerturbation,
  StandardPerturbation,
  LieDeprit,
  QuantumAveraging,
};

// Accepts both short tags (magnus, fm, rm, sp, ld, qa) and long names.
Method method_from_string(const std::string& s);
std::string method_name(Method m);

struct OrderDiagnostics {
  int order = 0;
  int omega_terms = 0;  // stored terms in Omega_n (P_n for standard perturbation)
  double min_divisor = std::numeric_limits<double>::infinity();
  bool secular_absorbed = false;  // an exactly resonant mode picked up a factor of t
};

// Output of expand(): the per-order generator pieces of one named scheme.
// Slot usage by method:
//   omega[n]   Omega_n for the exponential methods; P_n for standard perturbation
//   f_const[n] constant F_n (F_0 is the A0 the recursion actually ran on, which
//              is zero after an interaction-picture lift)
//   f_time[n]  quantum averaging only: the time-dependent F_n(t)
//   dyson_g[n] standard perturbation only: g_n in the interaction picture
//   rhs[n]     the right-hand side the order-n step had to split (kept for audits)
// All vectors are indexed 0..N with the 0 slots zero/empty where meaningless.
struct ExpansionSeries {
  Method method{};
  int order = 0;
  SystemSpec sys;  // the input system, unmodified
  bool interaction_picture = false;

  std::vector<ExpPolyMatrix> omega;
  std::vector<ComplexMatrix> f_const;
  std::vector<ExpPolyMatrix> f_time;
  std::vector<ExpPolyMatrix> dyson_g;
  std::vector<ExpPolyMatrix> rhs;
  std::vector<OrderDiagnostics> diagnostics;

  // F(eps) summed through the stored order; for quantum averaging the F_n(t)
  // are evaluated at time t (the effective constant of motion uses t = 0).
  ComplexMatrix effective_generator(double eps, double t = 0.0) const;

  // sum_{n>=1} eps^n Omega_n(t) evaluated numerically.
  ComplexMatrix generator_at(double eps, double t) const;
};

// Run the universal recursion for the requested method through order N >= 1.
// Magnus and Floquet-Magnus lift to the interaction picture first when A0 is
// nonzero; the remaining methods work on A0 directly (and require it to be
// diagonalizable).
ExpansionSeries expand(const SystemSpec& sys, Method method, int order);

// Direct evaluation of the order-n term of the Magnus series (n <= 4) by the
// descent-weighted permutation formula, integrating nested commutators over
// the time simplex with panel-refined Gauss-Legendre quadrature. Slow and
// independent of the recursion: intended as a cross-check.
ComplexMatrix magnus_direct_term(const std::function<ComplexMatrix(double)>& a, int n, double t,
                                 double quad_tol = 1e-10);
ComplexMatrix magnus_direct_term(const ExpPolyMatrix& a, int n, double t, double quad_tol = 1e-10);

inline constexpr double kMagnusBound = 3.14159265358979323846;
inline constexpr double kFloquetMagnusBound = 0.20925;

// Smallest t_f with int_0^{t_f} ||A(s)||_2 ds = bound, located by panelwise
// quadrature plus bisection (absolute tolerance ~1e-6 in t). Returns +inf when
// the accumulated integral stays below the bound up to t_cap.
double convergence_horizon(const std::function<ComplexMatrix(double)>& a, double bound,
                           double t_cap = 200.0);
double convergence_horizon(const ExpPolyMatrix& a, double bound, double t_cap = 200.0);

}  // namespace liexp

#endif
