#include "liexp/exp_poly.hpp"

#include <algorithm>
#include <cmath>

namespace liexp {

namespace {

double default_gamma(size_t r) { return std::max<double>(double(r), 2.0); }

}  // namespace

namespace {

void validate_frequencies(const std::vector<double>& freqs) {
  for (size_t i = 0; i < freqs.size(); ++i) {
    if (std::abs(freqs[i]) <= kRhoTol)
      throw ConfigError("SpectralBasis: base frequencies must be nonzero");
    for (size_t j = i + 1; j < freqs.size(); ++j)
      if (std::abs(freqs[i] - freqs[j]) <= kRhoTol)
        throw ConfigError("SpectralBasis: base frequencies must be pairwise distinct");
  }
}

}  // namespace

SpectralBasis::SpectralBasis(std::vector<double> frequencies, DiophantineParams dio)
    : frequencies_(std::move(frequencies)), dio_(dio) {
  validate_frequencies(frequencies_);
}

SpectralBasis::SpectralBasis(std::vector<double> frequencies)
    : frequencies_(std::move(frequencies)), dio_{1e-8, 2.0} {
  dio_.gamma = default_gamma(frequencies_.size());
  validate_frequencies(frequencies_);
}

double SpectralBasis::dot(const std::vector<int>& k) const {
  if (k.size() != frequencies_.size())
    throw BasisMismatchError("SpectralBasis::dot: mode vector length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < k.size(); ++i) s += k[i] * frequencies_[i];
  return s;
}

bool SpectralBasis::same_frequencies(const SpectralBasis& other) const {
  if (frequencies_.size() != other.frequencies_.size()) return false;
  for (size_t i = 0; i < frequencies_.size(); ++i)
    if (std::abs(frequencies_[i] - other.frequencies_[i]) > kRhoTol) return false;
  return true;
}

BasisUnion basis_union(const BasisPtr& b1, const BasisPtr& b2) {
  if (!b1 || !b2) throw BasisMismatchError("basis_union: null basis");
  const auto& d1 = b1->diophantine();
  const auto& d2 = b2->diophantine();
  if (b1->size() > 0 && b2->size() > 0 &&
      (std::abs(d1.delta - d2.delta) > 0 || std::abs(d1.gamma - d2.gamma) > 0))
    throw BasisMismatchError("basis_union: diophantine parameters disagree");

  BasisUnion out;
  if (b1.get() == b2.get() || b1->same_frequencies(*b2)) {
    out.basis = b1;
    out.map1.resize(size_t(b1->size()));
    for (int i = 0; i < b1->size(); ++i) out.map1[size_t(i)] = i;
    out.map2 = out.map1;
    return out;
  }
  std::vector<double> freqs = b1->frequencies();
  out.map1.resize(size_t(b1->size()));
  for (int i = 0; i < b1->size(); ++i) out.map1[size_t(i)] = i;
  out.map2.resize(size_t(b2->size()));
  for (int i = 0; i < b2->size(); ++i) {
    const double w = b2->frequencies()[size_t(i)];
    int found = -1;
    for (size_t q = 0; q < freqs.size(); ++q)
      if (std::abs(freqs[q] - w) <= kRhoTol) {
        found = int(q);
        break;
      }
    if (found < 0) {
      freqs.push_back(w);
      found = int(freqs.size()) - 1;
    }
    out.map2[size_t(i)] = found;
  }
  DiophantineParams dio = (b1->size() > 0) ? d1 : d2;
  out.basis = std::make_shared<SpectralBasis>(std::move(freqs), dio);
  return out;
}

ExpPolyMatrix::ExpPolyMatrix(BasisPtr basis, Eigen::Index rows, Eigen::Index cols)
    : basis_(std::move(basis)), rows_(rows), cols_(cols) {
  if (!basis_) throw BasisMismatchError("ExpPolyMatrix: null basis");
}

ExpPolyMatrix ExpPolyMatrix::constant(BasisPtr basis, const ComplexMatrix& value) {
  ExpPolyMatrix out(std::move(basis), value.rows(), value.cols());
  out.add_term(std::vector<int>(size_t(out.basis()->size()), 0), 0.0, 0, value);
  return out;
}

void ExpPolyMatrix::add_term(std::vector<int> k, double rho, int power,
                             const ComplexMatrix& coef) {
  if (coef.rows() != rows_ || coef.cols() != cols_)
    throw DimensionMismatchError("ExpPolyMatrix::add_term: coefficient shape mismatch");
  if (int(k.size()) != basis_->size())
    throw BasisMismatchError("ExpPolyMatrix::add_term: mode vector length mismatch");
  if (power < 0) throw ConfigError("ExpPolyMatrix::add_term: negative power");
  if (std::abs(rho) <= kRhoTol) rho = 0.0;
  if (coef.isZero(0.0)) return;

  ExpTermKey probe{k, power, rho - 2 * kRhoTol};
  auto it = terms_.lower_bound(probe);
  for (; it != terms_.end(); ++it) {
    if (it->first.k != k || it->first.power != power || it->first.rho > rho + 2 * kRhoTol)
      break;
    if (std::abs(it->first.rho - rho) <= kRhoTol) {
      it->second += coef;
      return;
    }
  }
  terms_.emplace(ExpTermKey{std::move(k), power, rho}, coef);
}

double ExpPolyMatrix::max_term_norm() const {
  double m = 0.0;
  for (const auto& [key, coef] : terms_) m = std::max(m, coef.norm());
  return m;
}

bool ExpPolyMatrix::is_quasi_periodic() const {
  for (const auto& [key, coef] : terms_)
    if (key.power != 0 || std::abs(key.rho) > kRhoTol) return false;
  return true;
}

void ExpPolyMatrix::prune(double tol) {
  const double cutoff = tol * max_term_norm();
  for (auto it = terms_.begin(); it != terms_.end();)
    it = (it->second.norm() <= cutoff) ? terms_.erase(it) : std::next(it);
}

void ExpPolyMatrix::remove_zero_mode() {
  ExpTermKey key{std::vector<int>(size_t(basis_->size()), 0), 0, 0.0};
  terms_.erase(key);
}

ExpPolyMatrix ExpPolyMatrix::scaled(Complex alpha) const {
  ExpPolyMatrix out(basis_, rows_, cols_);
  if (alpha == Complex(0.0)) return out;
  for (const auto& [key, coef] : terms_) out.terms_.emplace(key, alpha * coef);
  return out;
}

ExpPolyMatrix ExpPolyMatrix::adjoint() const {
  // For real t: (C t^m e^{(rho + i theta) t})^dagger = C^dagger t^m e^{(rho - i theta) t}.
  ExpPolyMatrix out(basis_, cols_, rows_);
  for (const auto& [key, coef] : terms_) {
    std::vector<int> nk(key.k.size());
    for (size_t q = 0; q < nk.size(); ++q) nk[q] = -key.k[q];
    out.add_term(std::move(nk), key.rho, key.power, coef.adjoint());
  }
  return out;
}

ExpPolyMatrix reindexed(const ExpPolyMatrix& x, const BasisPtr& basis,
                        const std::vector<int>& index_map) {
  ExpPolyMatrix out(basis, x.rows(), x.cols());
  for (const auto& [key, coef] : x.terms()) {
    std::vector<int> nk(size_t(basis->size()), 0);
    for (size_t q = 0; q < index_map.size(); ++q) nk[size_t(index_map[q])] = key.k[q];
    out.add_term(std::move(nk), key.rho, key.power, coef);
  }
  return out;
}

namespace {

// Bring two operands onto a common basis with minimal copying.
void unify(const ExpPolyMatrix& x, const ExpPolyMatrix& y, ExpPolyMatrix& xu,
           ExpPolyMatrix& yu, bool& copied) {
  if (x.basis().get() == y.basis().get() || x.basis()->same_frequencies(*y.basis())) {
    copied = false;
    return;
  }
  BasisUnion u = basis_union(x.basis(), y.basis());
  xu = reindexed(x, u.basis, u.map1);
  yu = reindexed(y, u.basis, u.map2);
  copied = true;
}

}  // namespace

ExpPolyMatrix ep_add(const ExpPolyMatrix& x, const ExpPolyMatrix& y, Complex alpha,
                     Complex beta) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw DimensionMismatchError("ep_add: shape mismatch");
  ExpPolyMatrix xu(x.basis(), 0, 0), yu(y.basis(), 0, 0);
  bool copied = false;
  unify(x, y, xu, yu, copied);
  const ExpPolyMatrix& a = copied ? xu : x;
  const ExpPolyMatrix& b = copied ? yu : y;

  ExpPolyMatrix out(a.basis(), a.rows(), a.cols());
  for (const auto& [key, coef] : a.terms()) out.add_term(key.k, key.rho, key.power, alpha * coef);
  for (const auto& [key, coef] : b.terms()) out.add_term(key.k, key.rho, key.power, beta * coef);
  out.prune();
  return out;
}

ExpPolyMatrix ep_mul(const ExpPolyMatrix& x, const ExpPolyMatrix& y) {
  if (x.cols() != y.rows()) throw DimensionMismatchError("ep_mul: inner dimension mismatch");
  ExpPolyMatrix xu(x.basis(), 0, 0), yu(y.basis(), 0, 0);
  bool copied = false;
  unify(x, y, xu, yu, copied);
  const ExpPolyMatrix& a = copied ? xu : x;
  const ExpPolyMatrix& b = copied ? yu : y;

  ExpPolyMatrix out(a.basis(), a.rows(), b.cols());
  std::vector<int> nk(size_t(a.basis()->size()));
  for (const auto& [ka, ca] : a.terms()) {
    for (const auto& [kb, cb] : b.terms()) {
      for (size_t q = 0; q < nk.size(); ++q) nk[q] = ka.k[q] + kb.k[q];
      out.add_term(nk, ka.rho + kb.rho, ka.power + kb.power, ca * cb);
    }
  }
  out.prune();
  return out;
}

ExpPolyMatrix ep_commutator(const ExpPolyMatrix& x, const ExpPolyMatrix& y) {
  return ep_add(ep_mul(x, y), ep_mul(y, x), 1.0, -1.0);
}

ComplexMatrix ep_eval(const ExpPolyMatrix& x, double t) {
  ComplexMatrix sum = ComplexMatrix::Zero(x.rows(), x.cols());
  ComplexMatrix comp = ComplexMatrix::Zero(x.rows(), x.cols());
  for (const auto& [key, coef] : x.terms()) {
    const double theta = x.basis()->dot(key.k);
    Complex scalar = std::exp(Complex(key.rho * t, theta * t));
    if (key.power > 0) scalar *= std::pow(t, key.power);
    const ComplexMatrix term = scalar * coef;
    // Kahan step, componentwise through complex arithmetic.
    const ComplexMatrix y = term - comp;
    const ComplexMatrix s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  return sum;
}

ExpPolyMatrix ep_integrate0(const ExpPolyMatrix& x) {
  ExpPolyMatrix out(x.basis(), x.rows(), x.cols());
  const std::vector<int> zero_k(size_t(x.basis()->size()), 0);
  for (const auto& [key, coef] : x.terms()) {
    const Complex mu(key.rho, x.basis()->dot(key.k));
    if (std::abs(mu) <= kRhoTol) {
      // Power rule; the key keeps its representation.
      out.add_term(key.k, key.rho, key.power + 1, coef / double(key.power + 1));
      continue;
    }
    // int_0^t s^m e^{mu s} ds = e^{mu t} sum_{j=0}^m (-1)^j m!/(m-j)! t^{m-j} / mu^{j+1}
    //                           - (-1)^m m! / mu^{m+1}
    double falling = 1.0;  // m!/(m-j)!
    Complex mu_pow = mu;   // mu^{j+1}
    double sign = 1.0;
    for (int j = 0; j <= key.power; ++j) {
      out.add_term(key.k, key.rho, key.power - j, (sign * falling / mu_pow) * coef);
      falling *= double(key.power - j);
      mu_pow *= mu;
      sign = -sign;
    }
    double fact = 1.0;
    for (int j = 2; j <= key.power; ++j) fact *= double(j);
    const double msign = (key.power % 2 == 0) ? 1.0 : -1.0;
    Complex mu_m1 = 1.0;
    for (int j = 0; j <= key.power; ++j) mu_m1 *= mu;
    out.add_term(zero_k, 0.0, 0, (-msign * fact / mu_m1) * coef);
  }
  out.prune();
  return out;
}

ExpPolyMatrix ep_derivative(const ExpPolyMatrix& x) {
  ExpPolyMatrix out(x.basis(), x.rows(), x.cols());
  for (const auto& [key, coef] : x.terms()) {
    const Complex mu(key.rho, x.basis()->dot(key.k));
    if (mu != Complex(0.0)) out.add_term(key.k, key.rho, key.power, mu * coef);
    if (key.power > 0)
      out.add_term(key.k, key.rho, key.power - 1, double(key.power) * coef);
  }
  out.prune();
  return out;
}

ComplexMatrix ep_limiting_mean(const ExpPolyMatrix& x) {
  ComplexMatrix mean = ComplexMatrix::Zero(x.rows(), x.cols());
  const double cutoff = kPruneTol * x.max_term_norm();
  for (const auto& [key, coef] : x.terms()) {
    if (coef.norm() <= cutoff) continue;
    if (key.power != 0)
      throw SecularTermError("ep_limiting_mean: polynomially growing term (power " +
                             std::to_string(key.power) + ")");
    if (std::abs(key.rho) > kRhoTol)
      throw SecularTermError("ep_limiting_mean: term with nonzero real exponent part " +
                             std::to_string(key.rho));
    const bool zero_mode =
        std::all_of(key.k.begin(), key.k.end(), [](int q) { return q == 0; });
    if (zero_mode) mean += coef;
  }
  return mean;
}

ExpConjugator::ExpConjugator(const EigDecomposition& a0, const BasisPtr& input_basis)
    : a0_(a0) {
  const int d = int(a0.values.size());
  std::vector<double> freqs = input_basis->frequencies();
  shift_k_.assign(size_t(d), std::vector<std::vector<int>>(size_t(d)));
  shift_rho_.assign(size_t(d), std::vector<double>(size_t(d), 0.0));

  // First pass: collect the Bohr frequencies that need new basis entries.
  struct Pending {
    int i, j;
    double theta;
  };
  std::vector<Pending> raw;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      shift_rho_[size_t(i)][size_t(j)] = a0.values(j).real() - a0.values(i).real();
      const double theta = a0.values(j).imag() - a0.values(i).imag();
      raw.push_back({i, j, theta});
    }
  // Match each imaginary shift against an integer multiple of a known
  // frequency; extend the basis with the (sign-canonicalized) leftovers.
  auto decompose = [&](double theta, std::vector<double>& fs) -> std::vector<int> {
    std::vector<int> dk(fs.size(), 0);
    if (std::abs(theta) <= kRhoTol) return dk;
    for (size_t q = 0; q < fs.size(); ++q) {
      const double n = std::round(theta / fs[q]);
      if (n != 0.0 && std::abs(theta - n * fs[q]) <= 1e-12 * std::max(1.0, std::abs(theta))) {
        dk[q] = int(n);
        return dk;
      }
    }
    fs.push_back(std::abs(theta));
    dk.resize(fs.size(), 0);
    dk.back() = (theta > 0) ? 1 : -1;
    return dk;
  };
  std::vector<std::vector<int>> dks;
  dks.reserve(raw.size());
  for (const auto& p : raw) dks.push_back(decompose(p.theta, freqs));
  for (size_t idx = 0; idx < raw.size(); ++idx) {
    auto dk = dks[idx];
    dk.resize(freqs.size(), 0);
    shift_k_[size_t(raw[idx].i)][size_t(raw[idx].j)] = std::move(dk);
  }
  DiophantineParams dio = input_basis->size() > 0
                              ? input_basis->diophantine()
                              : DiophantineParams{1e-8, default_gamma(freqs.size())};
  extended_ = std::make_shared<SpectralBasis>(std::move(freqs), dio);
}

ExpPolyMatrix ExpConjugator::apply(const ExpPolyMatrix& x, int sign) const {
  if (sign != 1 && sign != -1) throw ConfigError("ExpConjugator::apply: sign must be +-1");
  const int d = int(a0_.values.size());
  if (x.rows() != d || x.cols() != d)
    throw DimensionMismatchError("ExpConjugator::apply: shape mismatch with A0");

  // Embed x onto the extended basis; every operand frequency must already be there.
  std::vector<int> emb(size_t(x.basis()->size()));
  for (int q = 0; q < x.basis()->size(); ++q) {
    const double w = x.basis()->frequencies()[size_t(q)];
    int found = -1;
    for (int p = 0; p < extended_->size(); ++p)
      if (std::abs(extended_->frequencies()[size_t(p)] - w) <= kRhoTol) {
        found = p;
        break;
      }
    if (found < 0)
      throw BasisMismatchError(
          "ExpConjugator::apply: operand basis is not contained in the extended basis");
    emb[size_t(q)] = found;
  }
  ExpPolyMatrix xe = reindexed(x, extended_, emb);

  ExpPolyMatrix out(extended_, d, d);
  std::vector<int> nk(size_t(extended_->size()));
  for (const auto& [key, coef] : xe.terms()) {
    const ComplexMatrix y = a0_.inverse * coef * a0_.vectors;
    const double ynorm = y.norm();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (std::abs(y(i, j)) <= 1e-16 * ynorm) continue;
        // Rank-one piece V e_i y_ij e_j^T V^{-1} at the shifted exponent.
        const ComplexMatrix piece =
            a0_.vectors.col(i) * (y(i, j) * a0_.inverse.row(j));
        const auto& dk = shift_k_[size_t(i)][size_t(j)];
        for (size_t q = 0; q < nk.size(); ++q) nk[q] = key.k[q] + sign * dk[q];
        out.add_term(nk, key.rho + sign * shift_rho_[size_t(i)][size_t(j)], key.power, piece);
      }
    }
  }
  out.prune();
  return out;
}

ExpPolyMatrix ep_conjugate_exp(const EigDecomposition& a0, const ExpPolyMatrix& x,
                               int sign) {
  return ExpConjugator(a0, x.basis()).apply(x, sign);
}

}  // namespace liexp
