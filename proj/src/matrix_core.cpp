#include "liexp/matrix_core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace liexp {

double frobenius_norm(const ComplexMatrix& m) { return m.norm(); }

double spectral_norm(const ComplexMatrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

double bernoulli(int k) {
  // B1 = -1/2; odd k >= 3 vanish. Exact rationals, rounded once to double.
  static const double even_table[] = {
      1.0,                          // B0
      1.0 / 6.0,                    // B2
      -1.0 / 30.0,                  // B4
      1.0 / 42.0,                   // B6
      -1.0 / 30.0,                  // B8
      5.0 / 66.0,                   // B10
      -691.0 / 2730.0,              // B12
      7.0 / 6.0,                    // B14
      -3617.0 / 510.0,              // B16
      43867.0 / 798.0,              // B18
      -174611.0 / 330.0,            // B20
      854513.0 / 138.0,             // B22
      -236364091.0 / 2730.0,        // B24
      8553103.0 / 6.0,              // B26
      -23749461029.0 / 870.0,       // B28
      8615841276005.0 / 14322.0,    // B30
  };
  if (k < 0 || k > 30) throw ConfigError("bernoulli: index out of range");
  if (k == 1) return -0.5;
  if (k % 2 == 1) return 0.0;
  return even_table[k / 2];
}

namespace {

bool is_hermitian(const ComplexMatrix& m, double tol) {
  return (m - m.adjoint()).norm() <= tol;
}

bool is_skew_hermitian(const ComplexMatrix& m, double tol) {
  return (m + m.adjoint()).norm() <= tol;
}

}  // namespace

ComplexMatrix expm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatchError("expm: square matrix required");
  const double scale = m.norm();
  const double tol = 1e-13 * std::max(1.0, scale);
  if (is_skew_hermitian(m, tol)) {
    // m = -i H with H Hermitian; exp(m) = Q exp(-i diag) Q^dagger, unitary.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(Complex(0, 1) * m);
    const auto& q = es.eigenvectors();
    Eigen::VectorXcd phase(m.rows());
    for (Eigen::Index j = 0; j < m.rows(); ++j)
      phase(j) = std::exp(Complex(0, -es.eigenvalues()(j)));
    return q * phase.asDiagonal() * q.adjoint();
  }
  if (is_hermitian(m, tol)) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    const auto& q = es.eigenvectors();
    Eigen::VectorXcd ex(m.rows());
    for (Eigen::Index j = 0; j < m.rows(); ++j)
      ex(j) = std::exp(es.eigenvalues()(j));
    return q * ex.asDiagonal() * q.adjoint();
  }
  return m.exp();
}

EigDecomposition eig(const ComplexMatrix& m, double cond_limit) {
  if (m.rows() != m.cols()) throw DimensionMismatchError("eig: square matrix required");
  EigDecomposition out;
  const double scale = m.norm();
  const double tol = 1e-13 * std::max(1.0, scale);
  if (is_skew_hermitian(m, tol) || is_hermitian(m, tol)) {
    // Normal cases we care about most: unitary eigenbasis, condition 1.
    const bool skew = is_skew_hermitian(m, tol);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(skew ? ComplexMatrix(Complex(0, 1) * m) : m);
    out.vectors = es.eigenvectors();
    out.inverse = out.vectors.adjoint();
    out.values.resize(m.rows());
    for (Eigen::Index j = 0; j < m.rows(); ++j)
      out.values(j) = skew ? Complex(0, -es.eigenvalues()(j)) : Complex(es.eigenvalues()(j), 0);
    out.condition = 1.0;
    return out;
  }
  Eigen::ComplexEigenSolver<ComplexMatrix> es(m);
  if (es.info() != Eigen::Success)
    throw NonDiagonalizableError("eig: eigensolver failed to converge");
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  Eigen::JacobiSVD<ComplexMatrix> svd(out.vectors);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(m.rows() - 1);
  if (smin <= smax * 1e-14)
    throw NonDiagonalizableError("eig: eigenvector matrix numerically singular (defective input?)");
  out.condition = smax / smin;
  if (out.condition > cond_limit)
    throw IllConditionedEigenbasisError("eig: eigenbasis condition " +
                                        std::to_string(out.condition) +
                                        " exceeds limit");
  out.inverse = Eigen::PartialPivLU<ComplexMatrix>(out.vectors).inverse();
  return out;
}

ComplexMatrix homological_solve(const EigDecomposition& a0, double theta,
                                const ComplexMatrix& f,
                                const DiophantineParams& dio, int k_norm) {
  const Eigen::Index d = a0.values.size();
  if (f.rows() != d || f.cols() != d)
    throw DimensionMismatchError("homological_solve: dimension mismatch");
  const double kpow = (k_norm == 0) ? 1.0 : std::pow(double(k_norm), dio.gamma);
  const double bound = dio.delta / kpow;
  // Diophantine check over all eigenvalue pairs, independent of f's sparsity.
  for (Eigen::Index l = 0; l < d; ++l) {
    for (Eigen::Index mm = 0; mm < d; ++mm) {
      const Complex div = a0.values(l) - a0.values(mm) - Complex(0, theta);
      if (std::abs(div) <= bound)
        throw ResonanceError("homological_solve: divisor " + std::to_string(std::abs(div)) +
                                 " below diophantine bound " + std::to_string(bound),
                             int(l), int(mm), std::vector<int>{}, div);
    }
  }
  ComplexMatrix ft = a0.inverse * f * a0.vectors;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      ft(i, j) /= a0.values(j) - a0.values(i) + Complex(0, theta);
  return a0.vectors * ft * a0.inverse;
}

ComplexMatrix dexp_apply(const ComplexMatrix& omega, const ComplexMatrix& c,
                         int order) {
  ComplexMatrix term = c;
  ComplexMatrix sum = c;
  double coef = 1.0;
  for (int k = 1; k <= order; ++k) {
    term = commutator(omega, term);
    coef /= double(k + 1);
    sum += coef * term;
  }
  return sum;
}

}  // namespace liexp
