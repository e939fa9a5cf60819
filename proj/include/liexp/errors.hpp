#ifndef LIEXP_ERRORS_HPP
#define LIEXP_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace liexp {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class BasisMismatchError : public Error {
 public:
  using Error::Error;
};

// Raised when a limiting mean is requested for a family that grows or drifts
// (polynomial powers or nonzero real exponent parts).
class SecularTermError : public Error {
 public:
  using Error::Error;
};

// Small divisor in a homological solve: lambda_j - lambda_i + i*theta fell
// below the diophantine bound for the offending eigenvalue pair and mode.
class ResonanceError : public Error {
 public:
  ResonanceError(const std::string& msg, int l, int m, std::vector<int> k,
                 std::complex<double> divisor)
      : Error(msg), l_(l), m_(m), k_(std::move(k)), divisor_(divisor) {}
  int eig_l() const { return l_; }
  int eig_m() const { return m_; }
  const std::vector<int>& mode_k() const { return k_; }
  std::complex<double> divisor() const { return divisor_; }

 private:
  int l_;
  int m_;
  std::vector<int> k_;
  std::complex<double> divisor_;
};

class NonDiagonalizableError : public Error {
 public:
  using Error::Error;
};

class IllConditionedEigenbasisError : public Error {
 public:
  using Error::Error;
};

// Quantum-averaging existence condition failed: some interaction-picture mode
// has a growing real exponent part, so the limiting average does not exist.
class ExistenceConditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

class StepSizeUnderflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace liexp

#endif
