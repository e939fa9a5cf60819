#include "liexp/propagator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "liexp/errors.hpp"

namespace liexp {

AssembleMode assemble_mode_from_string(const std::string& s) {
  std::string t;
  t.reserve(s.size());
  for (char c : s) t.push_back(c == '-' ? '_' : char(std::tolower(static_cast<unsigned char>(c))));
  if (t == "full") return AssembleMode::Full;
  if (t == "effective_only" || t == "effective") return AssembleMode::EffectiveOnly;
  if (t == "generator_only" || t == "generator") return AssembleMode::GeneratorOnly;
  throw ConfigError("unknown assemble mode '" + s + "'");
}

namespace {

ComplexMatrix a0_of(const ExpansionSeries& s) {
  return s.sys.a0.size() > 0 ? s.sys.a0 : ComplexMatrix::Zero(s.sys.dim, s.sys.dim);
}

// The Dyson factor I + sum eps^n g_n(t) in the interaction picture.
ComplexMatrix dyson_series(const ExpansionSeries& s, double t, double eps) {
  ComplexMatrix g = ComplexMatrix::Identity(s.sys.dim, s.sys.dim);
  double en = 1.0;
  for (int n = 1; n <= s.order && size_t(n) < s.dyson_g.size(); ++n) {
    en *= eps;
    g += en * ep_eval(s.dyson_g[size_t(n)], t);
  }
  return g;
}

// Flow of the effective generator: e^{tA0} for remove-perturbation, e^{tF(eps)}
// for the constant-F schemes, and e^{tA0} e^{t(F(0,eps)-A0)} when F depends on
// time through resonant channels (the two factors commute with the flow).
ComplexMatrix core_flow(const ExpansionSeries& s, double t, double eps) {
  if (s.method == Method::StandardPerturbation)
    return expm(ComplexMatrix(t * a0_of(s)));
  bool time_dependent = false;
  for (size_t n = 1; n < s.f_time.size() && !time_dependent; ++n)
    if (s.f_time[n].term_count() > 0) time_dependent = true;
  const ComplexMatrix f0 = s.effective_generator(eps, 0.0);
  if (!time_dependent) return expm(ComplexMatrix(t * f0));
  const ComplexMatrix a0 = a0_of(s);
  return ComplexMatrix(expm(ComplexMatrix(t * a0)) * expm(ComplexMatrix(t * (f0 - a0))));
}

}  // namespace

ComplexMatrix assemble(const ExpansionSeries& series, double t, double eps, AssembleMode mode) {
  const int d = series.sys.dim;
  const ComplexMatrix prefix = series.interaction_picture
                                   ? expm(ComplexMatrix(t * a0_of(series)))
                                   : ComplexMatrix(ComplexMatrix::Identity(d, d));

  if (series.method == Method::StandardPerturbation) {
    switch (mode) {
      case AssembleMode::Full:
        return ComplexMatrix(core_flow(series, t, eps) * dyson_series(series, t, eps));
      case AssembleMode::EffectiveOnly:
        return core_flow(series, t, eps);
      case AssembleMode::GeneratorOnly: {
        // I + sum eps^n P_n(t), the series factor in the original frame.
        ComplexMatrix g = ComplexMatrix::Identity(d, d);
        g += series.generator_at(eps, t);
        return g;
      }
    }
  }

  switch (mode) {
    case AssembleMode::Full:
      return ComplexMatrix(prefix * expm(series.generator_at(eps, t)) *
                           core_flow(series, t, eps));
    case AssembleMode::EffectiveOnly:
      return ComplexMatrix(prefix * core_flow(series, t, eps));
    case AssembleMode::GeneratorOnly:
      return expm(series.generator_at(eps, t));
  }
  throw ConfigError("assemble: bad mode");
}

double transition_probability(const ComplexMatrix& u, int i, int j) {
  if (i < 1 || j < 1 || i > u.rows() || j > u.cols())
    throw ConfigError("transition_probability: observable index out of range");
  return std::norm(u(i - 1, j - 1));
}

double unitarity_defect(const ComplexMatrix& u) {
  const ComplexMatrix r =
      u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols());
  return spectral_norm(r);
}

PropagationResult propagate(const ExpansionSeries& series, const std::vector<double>& grid,
                            double eps, int i, int j, AssembleMode mode) {
  if (grid.empty()) throw ConfigError("propagate: empty time grid");
  for (size_t q = 1; q < grid.size(); ++q)
    if (!(grid[q] > grid[q - 1])) throw ConfigError("propagate: grid must be strictly increasing");
  if (i < 1 || j < 1 || i > series.sys.dim || j > series.sys.dim)
    throw ConfigError("propagate: observable index out of range");

  PropagationResult out;
  out.grid = grid;
  out.method = series.method;
  out.interaction_picture = series.interaction_picture;
  out.obs_i = i;
  out.obs_j = j;
  out.epsilon = eps;
  out.u.reserve(grid.size());
  out.p.reserve(grid.size());
  out.defect.reserve(grid.size());
  for (double t : grid) {
    ComplexMatrix u = assemble(series, t, eps, mode);
    out.p.push_back(transition_probability(u, i, j));
    out.defect.push_back(unitarity_defect(u));
    out.u.push_back(std::move(u));
  }
  return out;
}

std::vector<double> error_curve(const PropagationResult& result,
                                const std::vector<ComplexMatrix>& reference) {
  if (reference.size() != result.u.size())
    throw GridMismatchError("error_curve: sample counts differ");
  std::vector<double> err;
  err.reserve(reference.size());
  for (size_t q = 0; q < reference.size(); ++q) {
    const double p = transition_probability(result.u[q], result.obs_i, result.obs_j);
    const double pr = transition_probability(reference[q], result.obs_i, result.obs_j);
    err.push_back(std::abs(p - pr));
  }
  return err;
}

}  // namespace liexp
