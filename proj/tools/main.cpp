// Command line bench: sample the perturbative propagators against the
// reference integrator, print effective generators, locate convergence
// horizons. Exit codes: 0 success, 2 bad configuration, 3 a scheme failed
// mathematically (resonance, secular growth, nonexistent average, ...).
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "liexp/errors.hpp"
#include "liexp/expansion.hpp"
#include "liexp/propagator.hpp"
#include "liexp/reference.hpp"
#include "liexp/system.hpp"

namespace {

struct Cli {
  std::string system = "three-lambda-periodic";
  std::string method = "magnus";
  int order = 4;
  double epsilon = 1.0;
  double beta = 1.0;
  double omega = 0.0;  // 0 = builtin default
  double omega0 = 1.0;
  double tmax = 10.0;
  int samples = 201;
  std::string observable = "1,2";
  double ref_tol = 1e-12;
  std::string output;
  bool hamiltonian = false;
  std::string mode = "full";
  std::string sweep;
  double t_cap = 200.0;
};

liexp::SystemSpec make_system(const Cli& c) {
  const bool looks_like_file =
      std::filesystem::exists(c.system) ||
      (c.system.size() > 5 && c.system.substr(c.system.size() - 5) == ".json");
  if (looks_like_file) return liexp::load_system(c.system, c.hamiltonian);
  liexp::BuiltinParams p;
  p.beta = c.beta;
  p.omega = c.omega;
  p.omega0 = c.omega0;
  return liexp::builtin_system(c.system, p);
}

void parse_observable(const std::string& s, int& i, int& j) {
  if (std::sscanf(s.c_str(), "%d,%d", &i, &j) != 2)
    throw liexp::ConfigError("observable must be given as 'i,j' (1-based)");
}

std::vector<double> sweep_values(const Cli& c) {
  if (c.sweep.empty()) return {c.epsilon};
  const std::string prefix = "epsilon=";
  if (c.sweep.rfind(prefix, 0) != 0)
    throw liexp::ConfigError("sweep: expected 'epsilon=v1,v2,...'");
  std::vector<double> vals;
  std::string rest = c.sweep.substr(prefix.size());
  size_t pos = 0;
  while (pos <= rest.size()) {
    const size_t comma = rest.find(',', pos);
    const std::string tok = rest.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      vals.push_back(v);
    } catch (const std::exception&) {
      throw liexp::ConfigError("sweep: bad epsilon value '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (vals.empty()) throw liexp::ConfigError("sweep: no epsilon values given");
  return vals;
}

template <typename Fn>
void with_output(const Cli& c, Fn&& fn) {
  if (c.output.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream f(c.output);
  if (!f) throw liexp::ConfigError("cannot open output file '" + c.output + "'");
  fn(f);
}

int cmd_run(const Cli& c) {
  liexp::SystemSpec sys = make_system(c);
  const liexp::Method method = liexp::method_from_string(c.method);
  const liexp::AssembleMode mode = liexp::assemble_mode_from_string(c.mode);
  int oi = 1, oj = 2;
  parse_observable(c.observable, oi, oj);
  if (c.samples < 2) throw liexp::ConfigError("run: need at least 2 samples");
  if (!(c.tmax > 0.0)) throw liexp::ConfigError("run: tmax must be positive");
  if (c.order < 1) throw liexp::ConfigError("run: order must be at least 1");

  std::vector<double> grid(size_t(c.samples));
  for (int q = 0; q < c.samples; ++q)
    grid[size_t(q)] = c.tmax * double(q) / double(c.samples - 1);

  const std::vector<double> eps_list = sweep_values(c);
  const bool sweep = !c.sweep.empty();
  const liexp::ExpansionSeries series = liexp::expand(sys, method, c.order);
  liexp::ReferenceOptions ropts;
  ropts.tol = c.ref_tol;

  auto block = [&](double eps) {
    const liexp::PropagationResult pr = liexp::propagate(series, grid, eps, oi, oj, mode);
    const std::vector<liexp::ComplexMatrix> ref =
        liexp::reference_propagate(liexp::generator_fn(sys, eps), grid, ropts);
    std::string s;
    char line[384];
    for (size_t q = 0; q < grid.size(); ++q) {
      const double p_ref = liexp::transition_probability(ref[q], oi, oj);
      const double err = std::abs(pr.p[q] - p_ref);
      if (sweep)
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", eps, grid[q],
                      pr.p[q], p_ref, err, pr.defect[q]);
      else
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", grid[q], pr.p[q],
                      p_ref, err, pr.defect[q]);
      s += line;
    }
    return s;
  };

  std::vector<std::string> blocks(eps_list.size());
  if (eps_list.size() == 1) {
    blocks[0] = block(eps_list[0]);
  } else {
    // One worker per epsilon value, merged back in configuration order.
    std::atomic<size_t> next{0};
    std::mutex err_mx;
    std::exception_ptr first_error;
    auto worker = [&] {
      for (;;) {
        const size_t idx = next.fetch_add(1);
        if (idx >= eps_list.size()) return;
        try {
          blocks[idx] = block(eps_list[idx]);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mx);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    unsigned nt = std::thread::hardware_concurrency();
    if (nt == 0) nt = 2;
    nt = std::min<unsigned>(nt, unsigned(eps_list.size()));
    std::vector<std::thread> pool;
    for (unsigned q = 0; q < nt; ++q) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  with_output(c, [&](std::ostream& os) {
    os << (sweep ? "epsilon,t,P,P_ref,abs_err,unitarity_defect\n"
                 : "t,P,P_ref,abs_err,unitarity_defect\n");
    for (const auto& b : blocks) os << b;
  });
  return 0;
}

int cmd_effective(const Cli& c) {
  liexp::SystemSpec sys = make_system(c);
  const liexp::Method method = liexp::method_from_string(c.method);
  if (method != liexp::Method::FloquetMagnus && method != liexp::Method::LieDeprit &&
      method != liexp::Method::QuantumAveraging)
    throw liexp::ConfigError(
        "effective: a constant effective generator is reported for fm, ld and qa only");
  if (c.order < 1) throw liexp::ConfigError("effective: order must be at least 1");
  const liexp::ExpansionSeries series = liexp::expand(sys, method, c.order);
  // H_ef = i F(eps); time-dependent (resonant) parts are evaluated at t = 0.
  const liexp::ComplexMatrix h =
      liexp::Complex(0.0, 1.0) * series.effective_generator(c.epsilon, 0.0);
  with_output(c, [&](std::ostream& os) {
    os << "# H_ef method=" << liexp::method_name(method) << " order=" << c.order
       << " epsilon=" << c.epsilon << "\n";
    char buf[96];
    for (int i = 0; i < sys.dim; ++i) {
      for (int j = 0; j < sys.dim; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g%+.17gj", h(i, j).real(), h(i, j).imag());
        os << buf << (j + 1 < sys.dim ? " " : "\n");
      }
    }
  });
  return 0;
}

int cmd_horizon(const Cli& c) {
  liexp::SystemSpec sys = make_system(c);
  const liexp::ExpPolyMatrix full = liexp::full_generator_poly(sys, c.epsilon);
  const double hm = liexp::convergence_horizon(full, liexp::kMagnusBound, c.t_cap);
  // The Floquet-Magnus bound applies to the series input; after the
  // interaction-picture lift that is the perturbation alone.
  liexp::ExpPolyMatrix pert(sys.basis, sys.dim, sys.dim);
  double en = 1.0;
  for (size_t n = 0; n < sys.terms.size(); ++n) {
    en *= c.epsilon;
    pert = liexp::ep_add(pert, sys.terms[n], 1.0, en);
  }
  const double hf = liexp::convergence_horizon(pert, liexp::kFloquetMagnusBound, c.t_cap);
  with_output(c, [&](std::ostream& os) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "magnus: %.10g\n", hm);
    os << buf;
    std::snprintf(buf, sizeof buf, "floquet-magnus: %.10g\n", hf);
    os << buf;
  });
  return 0;
}

void add_system_options(CLI::App* cmd, Cli& c) {
  cmd->add_option("--system", c.system,
                  "builtin name (three-lambda-periodic, three-lambda-qp, bloch-siegert) or a "
                  "JSON file path");
  cmd->add_option("--beta", c.beta, "builtin coupling strength");
  cmd->add_option("--omega", c.omega, "builtin base frequency (0 = default)");
  cmd->add_option("--omega0", c.omega0, "builtin splitting (bloch-siegert)");
  cmd->add_flag("--hamiltonian", c.hamiltonian,
                "JSON file holds Hamiltonians H, generator is -iH");
  cmd->add_option("--epsilon", c.epsilon, "perturbation strength");
  cmd->add_option("--output", c.output, "write to this file instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"perturbative propagator bench"};
  app.require_subcommand(1);
  Cli c;

  CLI::App* run = app.add_subcommand("run", "sample a scheme against the reference integrator");
  add_system_options(run, c);
  CLI::Option* run_method = run->add_option("--method", c.method, "magnus|fm|rm|sp|ld|qa");
  run->add_option("--order", c.order, "truncation order N");
  run->add_option("--tmax", c.tmax, "final time");
  run->add_option("--samples", c.samples, "number of grid points (including t=0)");
  run->add_option("--observable", c.observable, "transition probability indices 'i,j' (1-based)");
  run->add_option("--ref-tol", c.ref_tol, "reference integrator tolerance");
  run->add_option("--mode", c.mode, "full|effective-only|generator-only");
  run->add_option("--sweep", c.sweep, "epsilon=v1,v2,... (one CSV block per value)");

  CLI::App* eff = app.add_subcommand("effective", "print H_ef = i F(epsilon)");
  add_system_options(eff, c);
  CLI::Option* eff_method = eff->add_option("--method", c.method, "fm|ld|qa");
  eff->add_option("--order", c.order, "truncation order N");

  CLI::App* hor = app.add_subcommand("horizon", "print the convergence horizons");
  add_system_options(hor, c);
  hor->add_option("--t-cap", c.t_cap, "give up beyond this time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (eff->parsed() && eff_method->count() == 0 && run_method->count() == 0)
      c.method = "fm";
    if (run->parsed()) return cmd_run(c);
    if (eff->parsed()) return cmd_effective(c);
    if (hor->parsed()) return cmd_horizon(c);
  } catch (const liexp::ResonanceError& e) {
    std::cerr << "error: " << e.what() << " [k=(";
    const auto& k = e.mode_k();
    for (size_t q = 0; q < k.size(); ++q) std::cerr << (q ? "," : "") << k[q];
    std::cerr << "), divisor=" << e.divisor().real() << (e.divisor().imag() < 0 ? "-" : "+")
              << std::abs(e.divisor().imag()) << "i]\n";
    return 3;
  } catch (const liexp::SecularTermError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const liexp::ExistenceConditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const liexp::NonDiagonalizableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const liexp::IllConditionedEigenbasisError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const liexp::StepSizeUnderflowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const liexp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
