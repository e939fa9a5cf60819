#ifndef LIEXP_MATRIX_CORE_HPP
#define LIEXP_MATRIX_CORE_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "liexp/errors.hpp"

namespace liexp {

using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

double frobenius_norm(const ComplexMatrix& m);

// Largest singular value.
double spectral_norm(const ComplexMatrix& m);

// Exact Bernoulli numbers as doubles, B1 = -1/2 convention (the one matching
// the dexpinv series). Defined for 0 <= k <= 30; odd k >= 3 give 0.
double bernoulli(int k);

// Matrix exponential. Skew-Hermitian and Hermitian inputs go through the
// Hermitian eigensolver (exactly unitary / positive results up to roundoff);
// everything else through scaling-and-squaring with a degree-13 diagonal Pade
// approximant.
ComplexMatrix expm(const ComplexMatrix& m);

struct EigDecomposition {
  Eigen::VectorXcd values;
  ComplexMatrix vectors;      // columns are eigenvectors
  ComplexMatrix inverse;      // vectors^{-1}, cached
  double condition = 0.0;     // 2-norm condition number of the eigenvector matrix
};

// Diagonalize a general complex matrix. Throws NonDiagonalizableError when the
// eigenvector matrix is numerically singular and IllConditionedEigenbasisError
// when its condition number exceeds cond_limit.
EigDecomposition eig(const ComplexMatrix& m, double cond_limit = 1e8);

struct DiophantineParams {
  double delta = 1e-8;
  double gamma = 2.0;
};

// Solve (-ad_{A0} + i*theta*I) X = f in the eigenbasis of A0: entrywise
// division by lambda_j - lambda_i + i*theta. k_norm is the l1 norm of the
// integer mode vector (|0|^gamma treated as 1). Divisors below
// delta / k_norm^gamma raise ResonanceError with the offending pair.
ComplexMatrix homological_solve(const EigDecomposition& a0, double theta,
                                const ComplexMatrix& f,
                                const DiophantineParams& dio, int k_norm);

// Truncated derivative of the exponential map applied to a direction:
// sum_{k=0}^{K} ad_Omega^k(C) / (k+1)!.
ComplexMatrix dexp_apply(const ComplexMatrix& omega, const ComplexMatrix& c,
                         int order);

}  // namespace liexp

#endif
