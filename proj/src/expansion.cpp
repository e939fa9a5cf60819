#include "liexp/expansion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "liexp/errors.hpp"
#include "liexp/matrix_core.hpp"

namespace liexp {

Method method_from_string(const std::string& s) {
  std::string t;
  t.reserve(s.size());
  for (char c : s) t.push_back(char(std::tolower(static_cast<unsigned char>(c))));
  if (t == "magnus") return Method::Magnus;
  if (t == "fm" || t == "floquet-magnus" || t == "floquet_magnus") return Method::FloquetMagnus;
  if (t == "rm" || t == "remove-perturbation" || t == "remove_perturbation")
    return Method::RemovePerturbation;
  if (t == "sp" || t == "dyson" || t == "standard-perturbation" || t == "standard_perturbation")
    return Method::StandardPerturbation;
  if (t == "ld" || t == "lie-deprit" || t == "lie_deprit") return Method::LieDeprit;
  if (t == "qa" || t == "quantum-averaging" || t == "quantum_averaging" || t == "averaging")
    return Method::QuantumAveraging;
  throw ConfigError("unknown method '" + s + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Magnus: return "magnus";
    case Method::FloquetMagnus: return "floquet-magnus";
    case Method::RemovePerturbation: return "remove-perturbation";
    case Method::StandardPerturbation: return "standard-perturbation";
    case Method::LieDeprit: return "lie-deprit";
    case Method::QuantumAveraging: return "quantum-averaging";
  }
  throw ConfigError("method_name: bad enum value");
}

namespace {

int l1norm(const std::vector<int>& k) {
  int s = 0;
  for (int q : k) s += std::abs(q);
  return s;
}

double factorial_d(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= double(i);
  return f;
}

EigDecomposition trivial_eig(int d) {
  EigDecomposition e;
  e.values = Eigen::VectorXcd::Zero(d);
  e.vectors = ComplexMatrix::Identity(d, d);
  e.inverse = ComplexMatrix::Identity(d, d);
  e.condition = 1.0;
  return e;
}

// Re-key x onto a basis whose frequency list contains all of x's frequencies.
ExpPolyMatrix embed_on(const ExpPolyMatrix& x, const BasisPtr& target) {
  if (x.basis().get() == target.get()) return x;
  std::vector<int> emb(size_t(x.basis()->size()));
  const auto& tf = target->frequencies();
  for (int q = 0; q < x.basis()->size(); ++q) {
    const double wq = x.basis()->frequencies()[size_t(q)];
    int found = -1;
    for (size_t p = 0; p < tf.size(); ++p)
      if (std::abs(tf[p] - wq) <= kRhoTol) {
        found = int(p);
        break;
      }
    if (found < 0)
      throw BasisMismatchError("expand: term frequency missing from the working basis");
    emb[size_t(q)] = found;
  }
  return reindexed(x, target, emb);
}

struct StepResult {
  ExpPolyMatrix omega;
  ExpPolyMatrix f_time;
  ComplexMatrix f_const;
  double min_divisor = std::numeric_limits<double>::infinity();
  bool secular = false;

  StepResult(const BasisPtr& b, int d)
      : omega(b, d, d), f_time(b, d, d), f_const(ComplexMatrix::Zero(d, d)) {}
};

bool has_powers(const ExpPolyMatrix& x) {
  for (const auto& [key, coef] : x.terms())
    if (key.power > 0) return true;
  return false;
}

StepResult step_magnus(const ExpPolyMatrix& fcal) {
  StepResult r(fcal.basis(), int(fcal.rows()));
  r.omega = ep_integrate0(fcal);
  r.secular = has_powers(r.omega);
  return r;
}

StepResult step_floquet_magnus(const ExpPolyMatrix& fcal, const DiophantineParams& dio) {
  StepResult r(fcal.basis(), int(fcal.rows()));
  const SpectralBasis& basis = *fcal.basis();
  for (const auto& [key, coef] : fcal.terms()) {
    const int kn = l1norm(key.k);
    if (kn == 0) continue;
    const Complex mu(key.rho, basis.dot(key.k));
    const double bound = dio.delta / std::pow(double(kn), dio.gamma);
    if (std::abs(mu) <= bound)
      throw ResonanceError("floquet-magnus: mode divisor below the diophantine floor", -1, -1,
                           key.k, mu);
    r.min_divisor = std::min(r.min_divisor, std::abs(mu));
  }
  r.f_const = ep_limiting_mean(fcal);
  ExpPolyMatrix rest = fcal;
  rest.remove_zero_mode();
  r.omega = ep_integrate0(rest);
  return r;
}

StepResult step_remove(const ExpPolyMatrix& fcal, const ExpConjugator& conj) {
  StepResult r(fcal.basis(), int(fcal.rows()));
  r.omega = conj.apply(ep_integrate0(conj.apply(fcal, +1)), -1);
  r.secular = has_powers(r.omega);
  return r;
}

// Entrywise solve of dW/dt = (rhs - F) + [A0, W] in the eigenbasis of A0.
// Divisor for an e^{mu t} t^p forcing at entry (i,j): mu + lam_j - lam_i.
StepResult step_lie_deprit(const ExpPolyMatrix& fcal, const EigDecomposition& es,
                           const ComplexMatrix& a0, const DiophantineParams& dio) {
  const int d = int(fcal.rows());
  StepResult r(fcal.basis(), d);
  const SpectralBasis& basis = *fcal.basis();
  double lam_scale = 0.0;
  for (int i = 0; i < d; ++i) lam_scale = std::max(lam_scale, std::abs(es.values(i)));

  ComplexMatrix f0 = ComplexMatrix::Zero(d, d);   // constant zero-mode part of the rhs
  ComplexMatrix c0 = ComplexMatrix::Zero(d, d);   // sum of the solved power-0 pieces
  const std::vector<int> zero_k(size_t(basis.size()), 0);

  for (const auto& [key, coef] : fcal.terms()) {
    const Complex mu(key.rho, basis.dot(key.k));
    if (std::abs(mu) <= kRhoTol && key.power == 0) {
      f0 += coef;
      continue;
    }
    const ComplexMatrix ft = es.inverse * coef * es.vectors;
    const double fnorm = ft.norm();
    if (fnorm == 0.0) continue;
    const int kn = l1norm(key.k);
    const double bound = kn > 0 ? dio.delta / std::pow(double(kn), dio.gamma) : dio.delta;
    const double res_tol = 1e-12 * std::max(1.0, std::abs(mu) + lam_scale);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (std::abs(ft(i, j)) <= 1e-14 * fnorm) continue;
        const Complex div = mu + es.values(j) - es.values(i);
        if (std::abs(div) <= res_tol) {
          // Exact resonance: absorb the forcing with one extra power of t.
          const ComplexMatrix piece =
              es.vectors.col(i) * ((ft(i, j) / double(key.power + 1)) * es.inverse.row(j));
          r.omega.add_term(key.k, key.rho, key.power + 1, piece);
          r.secular = true;
          continue;
        }
        if (std::abs(div) <= bound)
          throw ResonanceError("lie-deprit: near-resonant divisor", i, j, key.k, div);
        r.min_divisor = std::min(r.min_divisor, std::abs(div));
        // Polynomial forcings back-substitute downward from the top power.
        Complex c = ft(i, j) / div;
        for (int p = key.power;; --p) {
          const ComplexMatrix piece = es.vectors.col(i) * (c * es.inverse.row(j));
          r.omega.add_term(key.k, key.rho, p, piece);
          if (p == 0) {
            c0 += piece;
            break;
          }
          c = -double(p) * c / div;
        }
      }
    }
  }
  // W(0) = 0, and the constant balance fixes F = f0 + [C0, A0].
  r.omega.add_term(zero_k, 0.0, 0, -c0);
  r.omega.prune();
  r.f_const = f0 + c0 * a0 - a0 * c0;
  return r;
}

// Mode/entry-wise solve of dW/dt = (rhs - F) + [A0, W] with W(0) = 0, keeping
// the resonant channel inside a time-dependent F rather than growing in W.
StepResult step_averaging(const ExpPolyMatrix& fcal, const ExpConjugator& conj,
                          const DiophantineParams& dio) {
  const int d = int(fcal.rows());
  StepResult r(fcal.basis(), d);
  const EigDecomposition& es = conj.eigensystem();
  const SpectralBasis& basis = *fcal.basis();
  double lam_scale = 0.0;
  for (int i = 0; i < d; ++i) lam_scale = std::max(lam_scale, std::abs(es.values(i)));

  for (const auto& [key, coef] : fcal.terms()) {
    if (key.power != 0)
      throw SecularTermError("quantum-averaging: right-hand side carries a factor t^" +
                             std::to_string(key.power));
    const Complex mu(key.rho, basis.dot(key.k));
    const ComplexMatrix ft = es.inverse * coef * es.vectors;
    const double fnorm = ft.norm();
    if (fnorm == 0.0) continue;
    const int kn = l1norm(key.k);
    const double bound = kn > 0 ? dio.delta / std::pow(double(kn), dio.gamma) : dio.delta;
    const double res_tol = 1e-12 * std::max(1.0, std::abs(mu) + lam_scale);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        if (std::abs(ft(i, j)) <= 1e-14 * fnorm) continue;
        const Complex theta = mu + es.values(j) - es.values(i);
        if (theta.real() > res_tol)
          throw ExistenceConditionError(
              "quantum-averaging: a divisor has positive real part, the averaged generator "
              "does not exist");
        const ComplexMatrix piece = es.vectors.col(i) * (ft(i, j) * es.inverse.row(j));
        if (std::abs(theta) <= res_tol) {
          // Resonant channel: the entry stays in F(t) at its own mode.
          r.f_time.add_term(key.k, key.rho, 0, piece);
          r.secular = true;
          continue;
        }
        if (std::abs(theta) <= bound)
          throw ResonanceError("quantum-averaging: near-resonant divisor", i, j, key.k, theta);
        r.min_divisor = std::min(r.min_divisor, std::abs(theta));
        // W entry = f (e^{mu t} - e^{(lam_i - lam_j) t}) / theta.
        const Complex g = ft(i, j) / theta;
        r.omega.add_term(key.k, key.rho, 0, es.vectors.col(i) * (g * es.inverse.row(j)));
        r.omega.add_term(conj.shift_k(j, i), conj.shift_rho(j, i), 0,
                         es.vectors.col(i) * (-g * es.inverse.row(j)));
      }
    }
  }
  r.omega.prune();
  r.f_time.prune();
  r.f_const = ep_eval(r.f_time, 0.0);
  return r;
}

std::string order_tag(int n) { return "order " + std::to_string(n) + ": "; }

}  // namespace

ExpansionSeries expand(const SystemSpec& sys, Method method, int order) {
  if (order < 1) throw ConfigError("expand: order must be at least 1");
  validate_system(sys);
  const int d = sys.dim;
  const ComplexMatrix a0 = sys.a0.size() > 0 ? sys.a0 : ComplexMatrix::Zero(d, d);
  const bool has_a0 = a0.norm() > 0.0;
  const bool lift = has_a0 && (method == Method::Magnus || method == Method::FloquetMagnus);
  const bool wants_conj = lift || method == Method::RemovePerturbation ||
                          method == Method::StandardPerturbation ||
                          method == Method::QuantumAveraging;
  const bool wants_eig = wants_conj || method == Method::LieDeprit;

  EigDecomposition es = (has_a0 && wants_eig) ? eig(a0) : trivial_eig(d);
  std::unique_ptr<ExpConjugator> conj;
  if (wants_conj) conj = std::make_unique<ExpConjugator>(es, sys.basis);

  const BasisPtr work_basis = conj ? conj->extended_basis() : sys.basis;
  const ComplexMatrix work_a0 = lift ? ComplexMatrix::Zero(d, d) : a0;

  ExpansionSeries out;
  out.method = method;
  out.order = order;
  out.sys = sys;
  out.interaction_picture = lift;
  out.omega.emplace_back(work_basis, d, d);
  out.f_const.push_back(work_a0);
  out.f_time.emplace_back(work_basis, d, d);
  out.dyson_g.emplace_back(work_basis, d, d);
  out.rhs.emplace_back(work_basis, d, d);
  out.diagnostics.push_back(OrderDiagnostics{});

  // Perturbation orders moved onto the working basis (and through the lift).
  std::vector<ExpPolyMatrix> a;
  a.emplace_back(work_basis, d, d);
  for (int n = 1; n <= order; ++n) {
    if (size_t(n) <= sys.terms.size()) {
      const ExpPolyMatrix& src = sys.terms[size_t(n) - 1];
      if (lift)
        a.push_back(conj->apply(src, +1));
      else if (conj)
        a.push_back(embed_on(src, work_basis));
      else
        a.push_back(src);
    } else {
      a.emplace_back(work_basis, d, d);
    }
  }

  if (method == Method::StandardPerturbation) {
    for (size_t q = 1; q < sys.terms.size(); ++q)
      if (sys.terms[q].term_count() > 0)
        throw ConfigError("standard perturbation expects a single order-1 perturbation term");
    const ExpPolyMatrix ai = conj->apply(a[1], +1);
    ExpPolyMatrix g = ExpPolyMatrix::constant(work_basis, ComplexMatrix::Identity(d, d));
    for (int n = 1; n <= order; ++n) {
      g = ep_integrate0(ep_mul(ai, g));
      out.dyson_g.push_back(g);
      out.omega.push_back(conj->apply(g, -1));
      out.f_const.push_back(ComplexMatrix::Zero(d, d));
      out.f_time.emplace_back(work_basis, d, d);
      out.rhs.emplace_back(work_basis, d, d);
      OrderDiagnostics diag;
      diag.order = n;
      diag.omega_terms = int(out.omega.back().term_count());
      out.diagnostics.push_back(diag);
    }
    return out;
  }

  const DiophantineParams dio = work_basis->diophantine();
  std::vector<ExpPolyMatrix> fpoly;  // F_j as polynomials, for the V_n sums
  fpoly.push_back(ExpPolyMatrix::constant(work_basis, work_a0));
  std::vector<std::vector<ExpPolyMatrix>> w;  // w[n][k] = W_n^{(k)}
  w.emplace_back();

  for (int n = 1; n <= order; ++n) {
    OrderDiagnostics diag;
    diag.order = n;

    // Commutator ladder over the lower orders and its Bernoulli combination.
    std::vector<ExpPolyMatrix> ladder;
    ExpPolyMatrix g(work_basis, d, d);
    for (int k = 1; k <= n - 1; ++k) {
      ExpPolyMatrix wk(work_basis, d, d);
      for (int m = 1; m <= n - k; ++m)
        wk = ep_add(wk, ep_commutator(out.omega[size_t(m)], w[size_t(n - m)][size_t(k - 1)]));
      const double bk = bernoulli(k);
      if (bk != 0.0) g = ep_add(g, wk, 1.0, bk / factorial_d(k));
      ladder.push_back(std::move(wk));
    }

    ExpPolyMatrix v(work_basis, d, d);
    for (int k = 1; k <= n - 1; ++k)
      if (fpoly[size_t(n - k)].term_count() > 0)
        v = ep_add(v, ep_commutator(out.omega[size_t(k)], fpoly[size_t(n - k)]));

    ExpPolyMatrix fcal = ep_add(ep_add(a[size_t(n)], g), v, 1.0, -1.0);

    StepResult res(work_basis, d);
    try {
      switch (method) {
        case Method::Magnus:
          res = step_magnus(fcal);
          break;
        case Method::FloquetMagnus:
          res = step_floquet_magnus(fcal, dio);
          break;
        case Method::RemovePerturbation:
          res = step_remove(fcal, *conj);
          break;
        case Method::LieDeprit:
          res = step_lie_deprit(fcal, es, work_a0, dio);
          break;
        case Method::QuantumAveraging:
          res = step_averaging(fcal, *conj, dio);
          break;
        default:
          throw ConfigError("expand: method not handled");
      }
    } catch (const ResonanceError& e) {
      throw ResonanceError(order_tag(n) + e.what(), e.eig_l(), e.eig_m(), e.mode_k(),
                           e.divisor());
    } catch (const SecularTermError& e) {
      throw SecularTermError(order_tag(n) + e.what());
    } catch (const ExistenceConditionError& e) {
      throw ExistenceConditionError(order_tag(n) + e.what());
    }

    out.omega.push_back(res.omega);
    out.f_const.push_back(res.f_const);
    out.f_time.push_back(res.f_time);
    out.dyson_g.emplace_back(work_basis, d, d);
    out.rhs.push_back(std::move(fcal));
    diag.omega_terms = int(res.omega.term_count());
    diag.min_divisor = res.min_divisor;
    diag.secular_absorbed = res.secular;
    out.diagnostics.push_back(diag);

    fpoly.push_back(res.f_time.term_count() > 0
                        ? res.f_time
                        : ExpPolyMatrix::constant(work_basis, res.f_const));
    w.emplace_back();
    w.back().push_back(ep_add(a[size_t(n)], fpoly.back(), 1.0, -1.0));  // W_n^{(0)}
    for (auto& l : ladder) w.back().push_back(std::move(l));
  }
  return out;
}

ComplexMatrix ExpansionSeries::effective_generator(double eps, double t) const {
  ComplexMatrix f = f_const.empty() ? ComplexMatrix::Zero(sys.dim, sys.dim) : f_const[0];
  double en = 1.0;
  for (int n = 1; n <= order && size_t(n) < f_const.size(); ++n) {
    en *= eps;
    if (size_t(n) < f_time.size() && f_time[size_t(n)].term_count() > 0)
      f += en * ep_eval(f_time[size_t(n)], t);
    else
      f += en * f_const[size_t(n)];
  }
  return f;
}

ComplexMatrix ExpansionSeries::generator_at(double eps, double t) const {
  ComplexMatrix g = ComplexMatrix::Zero(sys.dim, sys.dim);
  double en = 1.0;
  for (int n = 1; n <= order && size_t(n) < omega.size(); ++n) {
    en *= eps;
    g += en * ep_eval(omega[size_t(n)], t);
  }
  return g;
}

namespace {

struct GlRule {
  std::vector<double> x, w;  // nodes/weights on [-1, 1]
};

const GlRule& gl_rule(int g) {
  static std::map<int, GlRule> cache;
  auto it = cache.find(g);
  if (it != cache.end()) return it->second;
  const double pi = 3.14159265358979323846;
  GlRule r;
  r.x.assign(size_t(g), 0.0);
  r.w.assign(size_t(g), 0.0);
  for (int i = 0; i < (g + 1) / 2; ++i) {
    double x = std::cos(pi * (double(i) + 0.75) / (double(g) + 0.5));
    double p1 = 0.0, dp = 1.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0;
      p1 = x;
      for (int k = 2; k <= g; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / double(k);
        p0 = p1;
        p1 = p2;
      }
      dp = double(g) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double weight = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[size_t(i)] = -x;
    r.x[size_t(g - 1 - i)] = x;
    r.w[size_t(i)] = weight;
    r.w[size_t(g - 1 - i)] = weight;
  }
  return cache.emplace(g, std::move(r)).first->second;
}

struct DescentPerm {
  std::vector<int> p;
  double coeff;
};

// Permutations of {0..n-2} with the descent-count weights of the order-n term.
std::vector<DescentPerm> descent_perms(int n) {
  const int m = n - 1;
  std::vector<double> binom(size_t(m) + 1, 1.0);
  for (int dnum = 1; dnum <= m; ++dnum)
    binom[size_t(dnum)] = binom[size_t(dnum) - 1] * double(m - dnum + 1) / double(dnum);
  std::vector<int> p(size_t(m), 0);
  for (int i = 0; i < m; ++i) p[size_t(i)] = i;
  std::vector<DescentPerm> out;
  do {
    int dnum = 0;
    for (int i = 0; i + 1 < m; ++i)
      if (p[size_t(i)] > p[size_t(i + 1)]) ++dnum;
    const double sign = (dnum % 2 == 0) ? 1.0 : -1.0;
    out.push_back({p, sign / (double(n) * binom[size_t(dnum)])});
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Nested simplex integral of the descent-weighted commutator sum. The A
// evaluations at the outer variables are shared down the recursion.
class SimplexIntegrator {
 public:
  SimplexIntegrator(const std::function<ComplexMatrix(double)>& a, int n)
      : a_(a), n_(n), rule_(gl_rule(12)) {
    const ComplexMatrix probe = a_(0.0);
    d_ = int(probe.rows());
    as_.assign(size_t(n_), ComplexMatrix::Zero(d_, d_));
    if (n_ >= 2) perms_ = descent_perms(n_);
    t1_.resize(d_, d_);
    t2_.resize(d_, d_);
    m_.resize(d_, d_);
  }

  ComplexMatrix run(double t, int panels) {
    panels_ = panels;
    return descend(0, t);
  }

 private:
  ComplexMatrix descend(int depth, double upper) {
    ComplexMatrix acc = ComplexMatrix::Zero(d_, d_);
    if (upper <= 0.0) return acc;
    const double hp = upper / double(panels_);
    for (int p = 0; p < panels_; ++p) {
      const double mid = (double(p) + 0.5) * hp;
      const double half = 0.5 * hp;
      for (size_t q = 0; q < rule_.x.size(); ++q) {
        const double s = mid + half * rule_.x[q];
        const double wq = half * rule_.w[q];
        as_[size_t(depth)] = a_(s);
        if (depth == n_ - 1)
          acc += wq * leaf();
        else
          acc += wq * descend(depth + 1, s);
      }
    }
    return acc;
  }

  ComplexMatrix leaf() {
    if (n_ == 1) return as_[0];
    ComplexMatrix sum = ComplexMatrix::Zero(d_, d_);
    for (const auto& perm : perms_) {
      m_ = as_[size_t(n_ - 1)];
      for (int i = n_ - 2; i >= 0; --i) {
        const ComplexMatrix& x = as_[size_t(perm.p[size_t(i)])];
        t1_.noalias() = x * m_;
        t2_.noalias() = m_ * x;
        m_ = t1_ - t2_;
      }
      sum += perm.coeff * m_;
    }
    return sum;
  }

  const std::function<ComplexMatrix(double)>& a_;
  int n_;
  int d_ = 0;
  int panels_ = 1;
  const GlRule& rule_;
  std::vector<ComplexMatrix> as_;
  std::vector<DescentPerm> perms_;
  ComplexMatrix t1_, t2_, m_;
};

}  // namespace

ComplexMatrix magnus_direct_term(const std::function<ComplexMatrix(double)>& a, int n, double t,
                                 double quad_tol) {
  if (n < 1 || n > 4) throw ConfigError("magnus_direct_term: order must be between 1 and 4");
  if (!(t >= 0.0)) throw ConfigError("magnus_direct_term: t must be nonnegative");
  SimplexIntegrator integ(a, n);
  const int pmax = (n >= 4) ? 4 : 8;
  ComplexMatrix prev;
  for (int panels = 1; panels <= pmax; panels *= 2) {
    const ComplexMatrix cur = integ.run(t, panels);
    if (panels > 1 && (cur - prev).norm() <= quad_tol * std::max(1.0, cur.norm())) return cur;
    prev = cur;
  }
  throw Error("magnus_direct_term: quadrature did not reach the requested tolerance");
}

ComplexMatrix magnus_direct_term(const ExpPolyMatrix& a, int n, double t, double quad_tol) {
  const std::function<ComplexMatrix(double)> fn = [&a](double s) { return ep_eval(a, s); };
  return magnus_direct_term(fn, n, t, quad_tol);
}

double convergence_horizon(const std::function<ComplexMatrix(double)>& a, double bound,
                           double t_cap) {
  if (!(bound > 0.0)) throw ConfigError("convergence_horizon: bound must be positive");
  if (!(t_cap > 0.0)) throw ConfigError("convergence_horizon: t_cap must be positive");
  const GlRule& rule = gl_rule(8);
  const auto panel_integral = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (size_t q = 0; q < rule.x.size(); ++q)
      s += half * rule.w[q] * spectral_norm(a(mid + half * rule.x[q]));
    return s;
  };

  const double h = 0.02;
  double acc = 0.0, t = 0.0;
  while (t < t_cap) {
    const double hh = std::min(h, t_cap - t);
    const double seg = panel_integral(t, t + hh);
    if (acc + seg >= bound) {
      double lo = t, hi = t + hh;
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (acc + panel_integral(t, mid) >= bound ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    acc += seg;
    t += hh;
  }
  return std::numeric_limits<double>::infinity();
}

double convergence_horizon(const ExpPolyMatrix& a, double bound, double t_cap) {
  const std::function<ComplexMatrix(double)> fn = [&a](double s) { return ep_eval(a, s); };
  return convergence_horizon(fn, bound, t_cap);
}

}  // namespace liexp
