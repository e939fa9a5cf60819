#ifndef LIEXP_EXP_POLY_HPP
#define LIEXP_EXP_POLY_HPP

#include <map>
#include <memory>
#include <vector>

#include "liexp/matrix_core.hpp"

namespace liexp {

// Absolute tolerance used when comparing real exponent parts and base
// frequencies. Exponents are otherwise matched exactly through their integer
// mode vectors, never through floating-point frequency values.
inline constexpr double kRhoTol = 1e-13;

// Default relative tolerance for dropping negligible terms.
inline constexpr double kPruneTol = 1e-14;

class SpectralBasis {
 public:
  SpectralBasis() = default;  // empty basis: purely polynomial-exponential in rho
  explicit SpectralBasis(std::vector<double> frequencies, DiophantineParams dio);
  explicit SpectralBasis(std::vector<double> frequencies);

  int size() const { return int(frequencies_.size()); }
  const std::vector<double>& frequencies() const { return frequencies_; }
  const DiophantineParams& diophantine() const { return dio_; }

  // (k, omega) for an integer mode vector of matching length.
  double dot(const std::vector<int>& k) const;

  bool same_frequencies(const SpectralBasis& other) const;

 private:
  std::vector<double> frequencies_;
  DiophantineParams dio_;
};

using BasisPtr = std::shared_ptr<const SpectralBasis>;

struct BasisUnion {
  BasisPtr basis;
  std::vector<int> map1;  // index of b1's i-th frequency inside the union
  std::vector<int> map2;
};

// Union of two bases. Frequencies equal within kRhoTol are identified.
// Diophantine parameters must agree.
BasisUnion basis_union(const BasisPtr& b1, const BasisPtr& b2);

// One exponent-power key: t^power * exp((rho + i (k, omega)) t).
struct ExpTermKey {
  std::vector<int> k;
  int power = 0;
  double rho = 0.0;
};

struct ExpTermKeyLess {
  bool operator()(const ExpTermKey& a, const ExpTermKey& b) const {
    if (a.k != b.k) return a.k < b.k;
    if (a.power != b.power) return a.power < b.power;
    return a.rho < b.rho;
  }
};

// Matrix with entries that are finite sums  sum_q C_q t^{m_q} e^{mu_q t},
// mu_q = rho_q + i (k_q, omega). Coefficients are stored matrix-wise per
// (k, power, rho) key; keys with equal k and power merge when their rho values
// agree within kRhoTol.
class ExpPolyMatrix {
 public:
  using TermMap = std::map<ExpTermKey, ComplexMatrix, ExpTermKeyLess>;

  ExpPolyMatrix(BasisPtr basis, Eigen::Index rows, Eigen::Index cols);

  static ExpPolyMatrix constant(BasisPtr basis, const ComplexMatrix& value);

  const BasisPtr& basis() const { return basis_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const TermMap& terms() const { return terms_; }
  int term_count() const { return int(terms_.size()); }
  bool empty() const { return terms_.empty(); }

  // Accumulate a term; merges with an existing key when possible. rho values
  // within kRhoTol of zero are canonicalized to exact zero.
  void add_term(std::vector<int> k, double rho, int power, const ComplexMatrix& coef);

  // Largest Frobenius norm over term coefficients (0 when empty).
  double max_term_norm() const;

  // All powers zero and all real exponent parts zero.
  bool is_quasi_periodic() const;

  // Drop terms with coefficient norm <= tol * max_term_norm().
  void prune(double tol = kPruneTol);

  // Remove the zero-exponent, zero-power term (exact removal, no subtraction).
  void remove_zero_mode();

  ExpPolyMatrix scaled(Complex alpha) const;
  ExpPolyMatrix adjoint() const;  // entrywise conjugate-transpose family: X(t)^dagger for real exponents... see note in source

 private:
  BasisPtr basis_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  TermMap terms_;

  friend ExpPolyMatrix reindexed(const ExpPolyMatrix& x, const BasisPtr& basis,
                                 const std::vector<int>& index_map);
};

// Re-embed x onto a larger basis; index_map[i] gives the position of x's i-th
// frequency in the new basis.
ExpPolyMatrix reindexed(const ExpPolyMatrix& x, const BasisPtr& basis,
                        const std::vector<int>& index_map);

// alpha*X + beta*Y (bases unified as needed, result pruned).
ExpPolyMatrix ep_add(const ExpPolyMatrix& x, const ExpPolyMatrix& y,
                     Complex alpha = 1.0, Complex beta = 1.0);

// X(t) * Y(t) as a family (exponents add, powers add, result pruned).
ExpPolyMatrix ep_mul(const ExpPolyMatrix& x, const ExpPolyMatrix& y);

ExpPolyMatrix ep_commutator(const ExpPolyMatrix& x, const ExpPolyMatrix& y);

// Pointwise value with compensated (Kahan) summation over terms.
ComplexMatrix ep_eval(const ExpPolyMatrix& x, double t);

// int_0^t X(s) ds, exact term-by-term. Exponents whose numerical value has
// magnitude <= kRhoTol integrate by the power rule (no error paths here).
ExpPolyMatrix ep_integrate0(const ExpPolyMatrix& x);

// d/dt X(t), exact term-by-term.
ExpPolyMatrix ep_derivative(const ExpPolyMatrix& x);

// Coefficient of the zero mode. SecularTermError when any non-negligible term
// has a positive power or a nonzero real exponent part.
ComplexMatrix ep_limiting_mean(const ExpPolyMatrix& x);

// Helper shared by conjugation and the method steps: precomputed eigen-shift
// data of A0 over an extended basis that contains the Bohr frequencies
// Im(lambda_j - lambda_i). Imaginary parts matching an integer multiple of an
// existing base frequency reuse it; unmatched ones extend the basis.
class ExpConjugator {
 public:
  ExpConjugator(const EigDecomposition& a0, const BasisPtr& input_basis);

  const BasisPtr& extended_basis() const { return extended_; }
  const EigDecomposition& eigensystem() const { return a0_; }

  // e^{-s t A0} X(t) e^{+s t A0} with s = sign (+1 is the interaction
  // picture). Entry (i,j) acquires the exponent shift s*(lambda_j - lambda_i).
  ExpPolyMatrix apply(const ExpPolyMatrix& x, int sign) const;

  // Shift bookkeeping for entry (i,j): lambda_j - lambda_i decomposed as
  // d_rho + i (dk, omega) over the extended basis.
  const std::vector<int>& shift_k(int i, int j) const { return shift_k_[size_t(i)][size_t(j)]; }
  double shift_rho(int i, int j) const { return shift_rho_[size_t(i)][size_t(j)]; }

 private:
  EigDecomposition a0_;
  BasisPtr extended_;
  std::vector<std::vector<std::vector<int>>> shift_k_;
  std::vector<std::vector<double>> shift_rho_;
};

// Convenience one-shot form: e^{-sign t A0} X(t) e^{+sign t A0}.
ExpPolyMatrix ep_conjugate_exp(const EigDecomposition& a0, const ExpPolyMatrix& x,
                               int sign);

}  // namespace liexp

#endif
