// Python bindings for the core operations: build systems, expand, assemble,
// and compare against the reference integrator.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liexp/errors.hpp"
#include "liexp/expansion.hpp"
#include "liexp/propagator.hpp"
#include "liexp/reference.hpp"
#include "liexp/system.hpp"

namespace py = pybind11;
using namespace liexp;

PYBIND11_MODULE(_liexp, m) {
  m.doc() = "exponential perturbative expansions for linear ODE systems";

  static py::exception<Error> exc_base(m, "LiexpError");
  static py::exception<ResonanceError> exc_res(m, "ResonanceError", exc_base);
  static py::exception<SecularTermError> exc_sec(m, "SecularTermError", exc_base);
  static py::exception<ExistenceConditionError> exc_exist(m, "ExistenceConditionError", exc_base);
  static py::exception<ConfigError> exc_cfg(m, "ConfigError", exc_base);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ResonanceError& e) {
      PyErr_SetString(exc_res.ptr(), e.what());
    } catch (const SecularTermError& e) {
      PyErr_SetString(exc_sec.ptr(), e.what());
    } catch (const ExistenceConditionError& e) {
      PyErr_SetString(exc_exist.ptr(), e.what());
    } catch (const ConfigError& e) {
      PyErr_SetString(exc_cfg.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(exc_base.ptr(), e.what());
    }
  });

  py::class_<SystemSpec>(m, "SystemSpec")
      .def_readonly("dim", &SystemSpec::dim)
      .def_readonly("name", &SystemSpec::name)
      .def_readonly("epsilon", &SystemSpec::epsilon)
      .def_readonly("skew_hermitian", &SystemSpec::skew_hermitian)
      .def_property_readonly("a0", [](const SystemSpec& s) { return s.a0; })
      .def_property_readonly("period",
                             [](const SystemSpec& s) -> py::object {
                               if (s.period) return py::float_(*s.period);
                               return py::none();
                             })
      .def_property_readonly("frequencies",
                             [](const SystemSpec& s) { return s.basis->frequencies(); })
      .def("generator", [](const SystemSpec& s, double eps, double t) {
        return eval_generator(s, eps, t);
      })
      .def("to_json", [](const SystemSpec& s) { return system_to_json(s); });

  m.def(
      "builtin_system",
      [](const std::string& name, double beta, double omega, double omega0) {
        BuiltinParams p;
        p.beta = beta;
        p.omega = omega;
        p.omega0 = omega0;
        return builtin_system(name, p);
      },
      py::arg("name"), py::arg("beta") = 1.0, py::arg("omega") = 0.0, py::arg("omega0") = 1.0);
  m.def("system_from_json", &system_from_json, py::arg("text"), py::arg("hamiltonian") = false);
  m.def("load_system", &load_system, py::arg("path"), py::arg("hamiltonian") = false);

  py::class_<OrderDiagnostics>(m, "OrderDiagnostics")
      .def_readonly("order", &OrderDiagnostics::order)
      .def_readonly("omega_terms", &OrderDiagnostics::omega_terms)
      .def_readonly("min_divisor", &OrderDiagnostics::min_divisor)
      .def_readonly("secular_absorbed", &OrderDiagnostics::secular_absorbed);

  py::class_<ExpansionSeries>(m, "ExpansionSeries")
      .def_readonly("order", &ExpansionSeries::order)
      .def_readonly("interaction_picture", &ExpansionSeries::interaction_picture)
      .def_property_readonly("method",
                             [](const ExpansionSeries& s) { return method_name(s.method); })
      .def_property_readonly("diagnostics",
                             [](const ExpansionSeries& s) { return s.diagnostics; })
      .def("effective_generator", &ExpansionSeries::effective_generator, py::arg("eps"),
           py::arg("t") = 0.0)
      .def("generator_at", &ExpansionSeries::generator_at, py::arg("eps"), py::arg("t"))
      .def(
          "omega_at",
          [](const ExpansionSeries& s, int n, double t) {
            if (n < 1 || size_t(n) >= s.omega.size())
              throw ConfigError("omega_at: order out of range");
            return ep_eval(s.omega[size_t(n)], t);
          },
          py::arg("n"), py::arg("t"))
      .def("f_const", [](const ExpansionSeries& s, int n) {
        if (n < 0 || size_t(n) >= s.f_const.size())
          throw ConfigError("f_const: order out of range");
        return s.f_const[size_t(n)];
      });

  m.def(
      "expand",
      [](const SystemSpec& sys, const std::string& method, int order) {
        return expand(sys, method_from_string(method), order);
      },
      py::arg("system"), py::arg("method"), py::arg("order"));

  py::class_<PropagationResult>(m, "PropagationResult")
      .def_readonly("grid", &PropagationResult::grid)
      // by value: the matrices must own their data on the python side
      .def_property_readonly(
          "u", [](const PropagationResult& r) { return std::vector<ComplexMatrix>(r.u); })
      .def_readonly("p", &PropagationResult::p)
      .def_readonly("defect", &PropagationResult::defect)
      .def_readonly("epsilon", &PropagationResult::epsilon);

  m.def(
      "assemble",
      [](const ExpansionSeries& s, double t, double eps, const std::string& mode) {
        return assemble(s, t, eps, assemble_mode_from_string(mode));
      },
      py::arg("series"), py::arg("t"), py::arg("eps"), py::arg("mode") = "full");
  m.def(
      "propagate",
      [](const ExpansionSeries& s, const std::vector<double>& grid, double eps, int i, int j,
         const std::string& mode) {
        return propagate(s, grid, eps, i, j, assemble_mode_from_string(mode));
      },
      py::arg("series"), py::arg("grid"), py::arg("eps"), py::arg("i") = 1, py::arg("j") = 2,
      py::arg("mode") = "full");
  m.def("transition_probability", &transition_probability, py::arg("u"), py::arg("i"),
        py::arg("j"));
  m.def("unitarity_defect", &unitarity_defect, py::arg("u"));

  m.def(
      "reference_propagate",
      [](const SystemSpec& sys, double eps, const std::vector<double>& grid, double tol) {
        ReferenceOptions opts;
        opts.tol = tol;
        return reference_propagate(generator_fn(sys, eps), grid, opts);
      },
      py::arg("system"), py::arg("eps"), py::arg("grid"), py::arg("tol") = 1e-12);

  m.def(
      "horizons",
      [](const SystemSpec& sys, double eps, double t_cap) {
        const ExpPolyMatrix full = full_generator_poly(sys, eps);
        ExpPolyMatrix pert(sys.basis, sys.dim, sys.dim);
        double en = 1.0;
        for (size_t n = 0; n < sys.terms.size(); ++n) {
          en *= eps;
          pert = ep_add(pert, sys.terms[n], 1.0, en);
        }
        return py::make_tuple(convergence_horizon(full, kMagnusBound, t_cap),
                              convergence_horizon(pert, kFloquetMagnusBound, t_cap));
      },
      py::arg("system"), py::arg("eps"), py::arg("t_cap") = 200.0);

  m.def(
      "magnus_direct_term",
      [](const SystemSpec& sys, double eps, int n, double t, double quad_tol) {
        return magnus_direct_term(full_generator_poly(sys, eps), n, t, quad_tol);
      },
      py::arg("system"), py::arg("eps"), py::arg("n"), py::arg("t"),
      py::arg("quad_tol") = 1e-10);

  m.attr("MAGNUS_BOUND") = kMagnusBound;
  m.attr("FLOQUET_MAGNUS_BOUND") = kFloquetMagnusBound;
}
