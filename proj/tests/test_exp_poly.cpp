#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "liexp/errors.hpp"
#include "liexp/exp_poly.hpp"
#include "liexp/matrix_core.hpp"

using namespace liexp;

namespace {

// Composite Simpson integral of a matrix-valued function, used as an
// independent oracle for the closed-form integrals.
ComplexMatrix simpson(const std::function<ComplexMatrix(double)>& f, double a, double b,
                      int panels = 4000) {
  const double h = (b - a) / double(2 * panels);
  ComplexMatrix acc = f(a) + f(b);
  for (int q = 1; q < 2 * panels; ++q) acc += (q % 2 ? 4.0 : 2.0) * f(a + h * q);
  return (h / 3.0) * acc;
}

ComplexMatrix random_matrix(int d, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(u(rng), u(rng));
  return m;
}

BasisPtr two_freq_basis() {
  return std::make_shared<SpectralBasis>(std::vector<double>{1.3, 2.7});
}

}  // namespace

TEST_CASE("add_term merges close keys and drops zero coefficients") {
  auto basis = two_freq_basis();
  ExpPolyMatrix x(basis, 2, 2);
  ComplexMatrix c = ComplexMatrix::Identity(2, 2);
  x.add_term({1, 0}, 0.0, 0, c);
  x.add_term({1, 0}, 5e-14, 0, c);  // same key within kRhoTol
  CHECK(x.term_count() == 1);
  CHECK((ep_eval(x, 0.7).norm() - ComplexMatrix(2.0 * c).norm()) < 1e-12);
  x.add_term({1, 0}, 0.0, 0, ComplexMatrix(-2.0 * c));
  CHECK(ep_eval(x, 0.7).norm() < 1e-12);  // merged away to zero
  x.add_term({0, 1}, 0.0, 0, ComplexMatrix::Zero(2, 2));
  CHECK(x.term_count() <= 2);  // an all-zero add contributes no new key
}

TEST_CASE("ep_eval matches the scalar formula") {
  auto basis = two_freq_basis();
  std::mt19937 rng(7);
  ExpPolyMatrix x(basis, 2, 2);
  const ComplexMatrix c1 = random_matrix(2, rng), c2 = random_matrix(2, rng);
  x.add_term({1, -1}, -0.2, 1, c1);
  x.add_term({0, 2}, 0.0, 0, c2);
  const double t = 0.83;
  const double th1 = 1.3 - 2.7, th2 = 2.0 * 2.7;
  const ComplexMatrix want = std::exp(Complex(-0.2 * t, th1 * t)) * t * c1 +
                             std::exp(Complex(0.0, th2 * t)) * c2;
  CHECK((ep_eval(x, t) - want).norm() < 1e-12 * want.norm());
}

TEST_CASE("ep_mul adds keys and multiplies coefficients") {
  auto basis = two_freq_basis();
  std::mt19937 rng(11);
  ExpPolyMatrix x(basis, 2, 2), y(basis, 2, 2);
  x.add_term({1, 0}, -0.1, 1, random_matrix(2, rng));
  x.add_term({0, 1}, 0.0, 0, random_matrix(2, rng));
  y.add_term({-1, 2}, 0.3, 2, random_matrix(2, rng));
  const ExpPolyMatrix z = ep_mul(x, y);
  for (double t : {0.0, 0.4, 1.9}) {
    const ComplexMatrix want = ep_eval(x, t) * ep_eval(y, t);
    CHECK((ep_eval(z, t) - want).norm() < 1e-11 * (1.0 + want.norm()));
  }
}

TEST_CASE("ep_integrate0 against Simpson quadrature") {
  auto basis = two_freq_basis();
  std::mt19937 rng(23);
  ExpPolyMatrix x(basis, 2, 2);
  x.add_term({1, 0}, 0.0, 0, random_matrix(2, rng));
  x.add_term({2, -1}, -0.4, 2, random_matrix(2, rng));  // decaying with a t^2 factor
  x.add_term({0, 0}, 0.0, 1, random_matrix(2, rng));    // pure power, exercises the t-rule
  const ExpPolyMatrix ix = ep_integrate0(x);
  CHECK(ep_eval(ix, 0.0).norm() < 1e-13);
  for (double t : {0.5, 1.7, 3.1}) {
    const ComplexMatrix want = simpson([&](double s) { return ep_eval(x, s); }, 0.0, t);
    CHECK((ep_eval(ix, t) - want).norm() < 1e-9 * (1.0 + want.norm()));
  }
}

TEST_CASE("ep_integrate0 switches to the power rule for tiny exponents") {
  auto basis = two_freq_basis();
  ExpPolyMatrix x(basis, 1, 1);
  ComplexMatrix c(1, 1);
  c(0, 0) = 1.0;
  x.add_term({0, 0}, 5e-14, 0, c);  // below kRhoTol
  const ExpPolyMatrix ix = ep_integrate0(x);
  CHECK(std::abs(ep_eval(ix, 2.0)(0, 0) - Complex(2.0)) < 1e-12);
  bool has_power = false;
  for (const auto& [key, coef] : ix.terms()) has_power = has_power || key.power == 1;
  CHECK(has_power);
}

TEST_CASE("ep_derivative against finite differences") {
  auto basis = two_freq_basis();
  std::mt19937 rng(31);
  ExpPolyMatrix x(basis, 2, 2);
  x.add_term({1, 1}, -0.3, 2, random_matrix(2, rng));
  x.add_term({0, -2}, 0.0, 0, random_matrix(2, rng));
  const ExpPolyMatrix dx = ep_derivative(x);
  const double t = 1.21, h = 1e-5;
  const ComplexMatrix fd =
      (ep_eval(x, t + h) - ep_eval(x, t - h)) / 2.0 / h;
  CHECK((ep_eval(dx, t) - fd).norm() < 1e-8 * (1.0 + fd.norm()));
}

TEST_CASE("ep_limiting_mean is the large-T average") {
  auto basis = two_freq_basis();
  std::mt19937 rng(41);
  ExpPolyMatrix x(basis, 2, 2);
  const ComplexMatrix mean = random_matrix(2, rng);
  x.add_term({0, 0}, 0.0, 0, mean);
  x.add_term({1, 0}, 0.0, 0, random_matrix(2, rng));
  x.add_term({-1, 2}, 0.0, 0, random_matrix(2, rng));
  CHECK((ep_limiting_mean(x) - mean).norm() < 1e-13);
  // oracle: (1/T) int_0^T x dt for growing T approaches the zero mode
  const double T = 4000.0;
  const ComplexMatrix avg = simpson([&](double s) { return ep_eval(x, s); }, 0.0, T, 40000) / T;
  CHECK((avg - mean).norm() < 2e-3);

  ExpPolyMatrix secular = x;
  secular.add_term({0, 0}, 0.0, 1, mean);
  CHECK_THROWS_AS((void)ep_limiting_mean(secular), SecularTermError);
  ExpPolyMatrix drifting = x;
  drifting.add_term({0, 0}, 0.07, 0, mean);
  CHECK_THROWS_AS((void)ep_limiting_mean(drifting), SecularTermError);
}

TEST_CASE("adjoint commutes with evaluation") {
  auto basis = two_freq_basis();
  std::mt19937 rng(43);
  ExpPolyMatrix x(basis, 3, 2);
  x.add_term({1, -2}, -0.15, 1, [&] {
    ComplexMatrix m(3, 2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = Complex(u(rng), u(rng));
    return m;
  }());
  const ExpPolyMatrix xa = x.adjoint();
  for (double t : {0.0, 0.9, 2.2}) {
    const ComplexMatrix want = ep_eval(x, t).adjoint();
    CHECK((ep_eval(xa, t) - want).norm() < 1e-12 * (1.0 + want.norm()));
  }
}

TEST_CASE("is_quasi_periodic and remove_zero_mode") {
  auto basis = two_freq_basis();
  ExpPolyMatrix x(basis, 1, 1);
  ComplexMatrix c(1, 1);
  c(0, 0) = 2.0;
  x.add_term({1, 0}, 0.0, 0, c);
  x.add_term({0, 0}, 0.0, 0, c);
  CHECK(x.is_quasi_periodic());
  x.remove_zero_mode();
  CHECK(x.term_count() == 1);
  x.add_term({0, 1}, -0.5, 0, c);
  CHECK_FALSE(x.is_quasi_periodic());
}

TEST_CASE("basis_union reindexes both operands consistently") {
  auto b1 = std::make_shared<SpectralBasis>(std::vector<double>{1.0});
  auto b2 = std::make_shared<SpectralBasis>(std::vector<double>{2.0, 1.0});
  ExpPolyMatrix x(b1, 1, 1), y(b2, 1, 1);
  ComplexMatrix c(1, 1);
  c(0, 0) = 1.0;
  x.add_term({3}, 0.0, 0, c);
  y.add_term({1, -3}, 0.0, 0, c);
  const ExpPolyMatrix s = ep_add(x, y);
  for (double t : {0.3, 1.1}) {
    const Complex want = std::exp(Complex(0, 3.0 * t)) + std::exp(Complex(0, (2.0 - 3.0) * t));
    CHECK(std::abs(ep_eval(s, t)(0, 0) - want) < 1e-12);
  }
}

TEST_CASE("ExpConjugator reproduces the interaction picture numerically") {
  // A0 skew-Hermitian with eigenvalues on the imaginary axis; conjugation by
  // e^{t A0} must match exp(-tA0) X(t) exp(tA0) entrywise.
  std::mt19937 rng(57);
  ComplexMatrix h = random_matrix(3, rng);
  h = ComplexMatrix(0.5 * (h + h.adjoint()));
  const ComplexMatrix a0 = Complex(0, -1) * h;
  auto basis = std::make_shared<SpectralBasis>(std::vector<double>{2.0});
  ExpPolyMatrix x(basis, 3, 3);
  x.add_term({1}, 0.0, 0, random_matrix(3, rng));
  x.add_term({0}, 0.0, 0, random_matrix(3, rng));

  const ExpConjugator conj(eig(a0), basis);
  const ExpPolyMatrix xi = conj.apply(x, +1);
  for (double t : {0.0, 0.6, 1.9}) {
    const ComplexMatrix em = expm(ComplexMatrix(t * a0));
    const ComplexMatrix want = em.inverse() * ep_eval(x, t) * em;
    CHECK((ep_eval(xi, t) - want).norm() < 1e-10 * (1.0 + want.norm()));
  }
  // round trip back to the original frame
  const ExpPolyMatrix back = conj.apply(xi, -1);
  for (double t : {0.4, 1.3}) {
    CHECK((ep_eval(back, t) - ep_eval(x, t)).norm() < 1e-10);
  }
}

TEST_CASE("ExpConjugator reuses integer multiples of known frequencies") {
  // A0 = -i diag(0, 2w): the Bohr frequencies are 0 and +-2w, already integer
  // multiples of w, so the extended basis should not grow.
  const double w = 1.7;
  ComplexMatrix a0 = ComplexMatrix::Zero(2, 2);
  a0(1, 1) = Complex(0, -2.0 * w);
  auto basis = std::make_shared<SpectralBasis>(std::vector<double>{w});
  const ExpConjugator conj(eig(a0), basis);
  CHECK(conj.extended_basis()->size() == 1);
}
