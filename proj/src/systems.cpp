#include "liexp/system.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace liexp {

using nlohmann::json;

namespace {

const Complex kI(0.0, 1.0);

ComplexMatrix zero(int d) { return ComplexMatrix::Zero(d, d); }

// Hermitian H -> generator A = -iH (hbar = 1 throughout).
void add_mode(ExpPolyMatrix& a, std::vector<int> k, const ComplexMatrix& h) {
  a.add_term(std::move(k), 0.0, 0, -kI * h);
}

}  // namespace

const ExpPolyMatrix& SystemSpec::term(int n) const {
  if (n < 1 || n > int(terms.size())) throw ConfigError("SystemSpec::term: no term of order " + std::to_string(n));
  return terms[size_t(n - 1)];
}

SystemSpec builtin_system(const std::string& name, const BuiltinParams& params) {
  const double beta = params.beta;
  SystemSpec sys;
  sys.name = name;
  sys.skew_hermitian = true;

  if (name == "three-lambda-periodic" || name == "three-lambda-qp") {
    const bool qp = (name == "three-lambda-qp");
    const double omega =
        params.omega > 0.0 ? params.omega : (qp ? 12.0 : 10.0 / std::sqrt(1.0 + std::sqrt(2.0) / 2.0));
    sys.dim = 3;
    sys.a0 = zero(3);
    if (qp)
      sys.basis = std::make_shared<SpectralBasis>(std::vector<double>{omega, std::sqrt(2.0) * omega});
    else {
      sys.basis = std::make_shared<SpectralBasis>(std::vector<double>{omega});
      sys.period = 2.0 * M_PI / omega;
    }

    // H = conj(f) * P + f * Q with P = |1><3| + |2><3|, Q = |3><1| + |3><2|.
    ComplexMatrix p = zero(3), q = zero(3);
    p(0, 2) = p(1, 2) = 1.0;
    q(2, 0) = q(2, 1) = 1.0;

    ExpPolyMatrix a1(sys.basis, 3, 3);
    if (qp) {
      add_mode(a1, {1, 0}, beta * q);
      add_mode(a1, {0, 1}, beta * q);
      add_mode(a1, {-1, 0}, beta * p);
      add_mode(a1, {0, -1}, beta * p);
    } else {
      add_mode(a1, {1}, beta * q);
      add_mode(a1, {-1}, beta * p);
    }
    sys.terms.push_back(std::move(a1));
    return sys;
  }

  if (name == "bloch-siegert") {
    const double omega = params.omega > 0.0 ? params.omega : 1.0;
    const double omega0 = params.omega0;
    sys.dim = 2;
    sys.basis = std::make_shared<SpectralBasis>(std::vector<double>{omega});
    sys.period = 2.0 * M_PI / omega;

    ComplexMatrix h0(2, 2), sigma1(2, 2);
    h0 << 0.5 * omega0, 0.0, 0.0, -0.5 * omega0;
    sigma1 << 0.0, 1.0, 1.0, 0.0;
    sys.a0 = -kI * h0;

    // cos(wt) sigma1 split over the modes e^{+iwt}, e^{-iwt}
    ExpPolyMatrix a1(sys.basis, 2, 2);
    add_mode(a1, {1}, 0.5 * sigma1);
    add_mode(a1, {-1}, 0.5 * sigma1);
    sys.terms.push_back(std::move(a1));
    return sys;
  }

  throw ConfigError("builtin_system: unknown system '" + name + "'");
}

void validate_system(const SystemSpec& sys) {
  if (sys.dim < 1) throw ConfigError("validate_system: dim must be positive");
  if (!sys.basis) throw ConfigError("validate_system: missing spectral basis");
  if (sys.a0.rows() != sys.dim || sys.a0.cols() != sys.dim)
    throw ConfigError("validate_system: A0 shape disagrees with dim");
  if (sys.epsilon < 0.0) throw ConfigError("validate_system: epsilon must be >= 0");

  for (const auto& a : sys.terms) {
    if (a.rows() != sys.dim || a.cols() != sys.dim)
      throw ConfigError("validate_system: perturbation term shape disagrees with dim");
    if (a.basis().get() != sys.basis.get() && !a.basis()->same_frequencies(*sys.basis))
      throw ConfigError("validate_system: perturbation term uses a different basis");
  }

  if (sys.skew_hermitian) {
    auto check = [](const ComplexMatrix& m, const std::string& what) {
      double scale = std::max(1.0, m.norm());
      if ((m + m.adjoint()).norm() > 1e-12 * scale)
        throw ConfigError("validate_system: " + what + " is not skew-Hermitian");
    };
    check(sys.a0, "A0");
    for (size_t n = 0; n < sys.terms.size(); ++n)
      for (double t : {0.0, 0.37, 1.73, 4.19})
        check(ep_eval(sys.terms[n], t), "A_" + std::to_string(n + 1) + "(t)");
  }

  if (sys.period) {
    const double T = *sys.period;
    if (!(T > 0.0)) throw ConfigError("validate_system: period must be positive");
    for (const auto& a : sys.terms)
      for (const auto& [key, coef] : a.terms()) {
        (void)coef;
        if (key.power != 0 || std::abs(key.rho) > kRhoTol)
          throw ConfigError("validate_system: polynomial/decaying mode breaks declared periodicity");
        double cycles = a.basis()->dot(key.k) * T / (2.0 * M_PI);
        if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, std::abs(cycles)))
          throw ConfigError("validate_system: mode incommensurate with declared period");
      }
  }
}

ComplexMatrix eval_generator(const SystemSpec& sys, double epsilon, double t) {
  ComplexMatrix a = sys.a0;
  double en = 1.0;
  for (const auto& an : sys.terms) {
    en *= epsilon;
    a += en * ep_eval(an, t);
  }
  return a;
}

GeneratorFn generator_fn(const SystemSpec& sys, double epsilon) {
  return [sys, epsilon](double t) { return eval_generator(sys, epsilon, t); };
}

ExpPolyMatrix full_generator_poly(const SystemSpec& sys, double epsilon) {
  ExpPolyMatrix acc = ExpPolyMatrix::constant(sys.basis, sys.a0);
  double en = 1.0;
  for (const auto& an : sys.terms) {
    en *= epsilon;
    acc = ep_add(acc, an, 1.0, en);
  }
  return acc;
}

namespace {

ComplexMatrix matrix_from_json(const json& re, const json& im, int d, const std::string& what) {
  if (!re.is_array() || !im.is_array() || int(re.size()) != d || int(im.size()) != d)
    throw ConfigError("system json: " + what + " must be " + std::to_string(d) + " rows of re/im");
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    const auto& rr = re[size_t(i)];
    const auto& ri = im[size_t(i)];
    if (int(rr.size()) != d || int(ri.size()) != d)
      throw ConfigError("system json: " + what + " row " + std::to_string(i) + " has wrong length");
    for (int j = 0; j < d; ++j) m(i, j) = Complex(rr[size_t(j)].get<double>(), ri[size_t(j)].get<double>());
  }
  return m;
}

json matrix_to_json_re(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).real());
    rows.push_back(std::move(row));
  }
  return rows;
}

json matrix_to_json_im(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).imag());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SystemSpec system_from_json(const std::string& text, bool hamiltonian) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("system json: parse failure: ") + e.what());
  }

  try {
    SystemSpec sys;
    sys.dim = doc.at("dim").get<int>();
    if (sys.dim < 1) throw ConfigError("system json: dim must be positive");

    std::vector<double> freqs = doc.value("frequencies", std::vector<double>{});
    sys.basis = std::make_shared<SpectralBasis>(std::move(freqs));

    sys.a0 = matrix_from_json(doc.at("A0").at("re"), doc.at("A0").at("im"), sys.dim, "A0");
    sys.skew_hermitian = doc.value("skew_hermitian", false);
    if (doc.contains("period")) sys.period = doc.at("period").get<double>();
    if (doc.contains("name")) sys.name = doc.at("name").get<std::string>();

    int max_order = 0;
    for (const auto& term : doc.value("terms", json::array())) max_order = std::max(max_order, term.at("order").get<int>());
    for (int n = 0; n < max_order; ++n) sys.terms.emplace_back(sys.basis, sys.dim, sys.dim);

    for (const auto& term : doc.value("terms", json::array())) {
      int order = term.at("order").get<int>();
      if (order < 1) throw ConfigError("system json: term order must be >= 1");
      ExpPolyMatrix& a = sys.terms[size_t(order - 1)];
      for (const auto& mode : term.at("modes")) {
        std::vector<int> k = mode.value("k", std::vector<int>{});
        if (int(k.size()) != sys.basis->size())
          throw ConfigError("system json: mode vector length disagrees with frequencies");
        double rho = mode.value("rho", 0.0);
        int power = mode.value("power", 0);
        if (power < 0) throw ConfigError("system json: mode power must be >= 0");
        ComplexMatrix coef = matrix_from_json(mode.at("re"), mode.at("im"), sys.dim, "mode coefficient");
        a.add_term(std::move(k), rho, power, coef);
      }
    }

    if (hamiltonian) {
      sys.a0 = -kI * sys.a0;
      for (auto& a : sys.terms) a = a.scaled(-kI);
    }
    return sys;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("system json: ") + e.what());
  }
}

std::string system_to_json(const SystemSpec& sys) {
  json doc;
  doc["dim"] = sys.dim;
  doc["frequencies"] = sys.basis ? sys.basis->frequencies() : std::vector<double>{};
  doc["A0"] = {{"re", matrix_to_json_re(sys.a0)}, {"im", matrix_to_json_im(sys.a0)}};
  doc["skew_hermitian"] = sys.skew_hermitian;
  if (sys.period) doc["period"] = *sys.period;
  if (!sys.name.empty()) doc["name"] = sys.name;

  json terms = json::array();
  for (size_t n = 0; n < sys.terms.size(); ++n) {
    if (sys.terms[n].empty()) continue;
    json modes = json::array();
    for (const auto& [key, coef] : sys.terms[n].terms()) {
      json mode;
      mode["k"] = key.k;
      mode["rho"] = key.rho;
      mode["power"] = key.power;
      mode["re"] = matrix_to_json_re(coef);
      mode["im"] = matrix_to_json_im(coef);
      modes.push_back(std::move(mode));
    }
    terms.push_back(json{{"order", int(n + 1)}, {"modes", std::move(modes)}});
  }
  doc["terms"] = std::move(terms);
  return doc.dump(2);
}

SystemSpec load_system(const std::string& path, bool hamiltonian) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_system: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  SystemSpec sys = system_from_json(buf.str(), hamiltonian);
  validate_system(sys);
  return sys;
}

void save_system(const SystemSpec& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_system: cannot open '" + path + "' for writing");
  out << system_to_json(sys) << "\n";
}

}  // namespace liexp
