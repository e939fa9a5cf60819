#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "liexp/errors.hpp"
#include "liexp/matrix_core.hpp"
#include "liexp/reference.hpp"

using namespace liexp;

namespace {

ComplexMatrix random_skew(int d, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(u(rng), u(rng));
  return 0.5 * (m - m.adjoint().eval());
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g(static_cast<size_t>(n));
  for (int q = 0; q < n; ++q) g[size_t(q)] = a + (b - a) * double(q) / double(n - 1);
  return g;
}

}  // namespace

TEST_CASE("reference_propagate reproduces a constant-generator flow") {
  std::mt19937 rng(51);
  const ComplexMatrix a = random_skew(3, rng);
  const auto fn = [&](double) { return a; };
  const auto grid = linspace(0.0, 8.0, 9);
  const auto u = reference_propagate(fn, grid);
  for (size_t q = 0; q < grid.size(); ++q)
    CHECK((u[q] - expm(grid[q] * a)).norm() < 2e-11);
}

TEST_CASE("reference_propagate handles a commuting time-dependent family") {
  std::mt19937 rng(52);
  const ComplexMatrix k = random_skew(2, rng);
  // A(t) = cos(t) K commutes with itself, so U(t) = exp(sin(t) K).
  const auto fn = [&](double t) { return ComplexMatrix(std::cos(t) * k); };
  const auto grid = linspace(0.0, 12.0, 13);
  const auto u = reference_propagate(fn, grid);
  for (size_t q = 0; q < grid.size(); ++q)
    CHECK((u[q] - expm(std::sin(grid[q]) * k)).norm() < 2e-11);
}

TEST_CASE("reference_propagate starts at the front of the grid") {
  std::mt19937 rng(53);
  const ComplexMatrix a = random_skew(2, rng);
  const auto fn = [&](double) { return a; };
  const auto u = reference_propagate(fn, {2.0, 3.5});
  CHECK((u[0] - ComplexMatrix::Identity(2, 2)).norm() == 0.0);
  CHECK((u[1] - expm(1.5 * a)).norm() < 1e-11);
}

TEST_CASE("reference_propagate keeps unitarity near the tolerance") {
  std::mt19937 rng(54);
  const ComplexMatrix k = random_skew(3, rng);
  const auto fn = [&](double t) { return ComplexMatrix((0.3 + std::sin(1.7 * t)) * k); };
  const auto u = reference_propagate(fn, linspace(0.0, 20.0, 21));
  for (const auto& m : u)
    CHECK((m.adjoint() * m - ComplexMatrix::Identity(3, 3)).norm() < 1e-9);
}

TEST_CASE("two tolerances bracket each other on a generic system") {
  std::mt19937 rng(55);
  const ComplexMatrix k1 = random_skew(2, rng), k2 = random_skew(2, rng);
  const auto fn = [&](double t) { return ComplexMatrix(std::cos(t) * k1 + std::sin(2.0 * t) * k2); };
  const auto grid = linspace(0.0, 10.0, 6);
  ReferenceOptions loose;
  loose.tol = 1e-8;
  const auto ua = reference_propagate(fn, grid);
  const auto ub = reference_propagate(fn, grid, loose);
  for (size_t q = 0; q < grid.size(); ++q) CHECK((ua[q] - ub[q]).norm() < 1e-6);
}

TEST_CASE("reference_propagate validates its configuration") {
  const auto fn = [](double) { return ComplexMatrix::Identity(2, 2).eval(); };
  CHECK_THROWS_AS(reference_propagate(fn, {}), ConfigError);
  CHECK_THROWS_AS(reference_propagate(fn, {0.0, 2.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(reference_propagate(fn, {0.0, 0.0}), ConfigError);
  ReferenceOptions bad;
  bad.tol = 1e-15;
  CHECK_THROWS_AS(reference_propagate(fn, {0.0, 1.0}, bad), ConfigError);
  bad.tol = 1e-5;
  CHECK_THROWS_AS(reference_propagate(fn, {0.0, 1.0}, bad), ConfigError);
}

TEST_CASE("reference_propagate reports an exhausted step budget") {
  std::mt19937 rng(56);
  const ComplexMatrix k = random_skew(2, rng);
  const auto fn = [&](double t) { return ComplexMatrix(std::cos(5.0 * t) * k); };
  ReferenceOptions tight;
  tight.max_steps = 3;
  CHECK_THROWS_AS(reference_propagate(fn, linspace(0.0, 50.0, 5), tight),
                  StepSizeUnderflowError);
}
