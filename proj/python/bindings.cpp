#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "optomech/cli.hpp"
#include "optomech/correlation.hpp"
#include "optomech/fluctuations.hpp"
#include "optomech/reduced.hpp"
#include "optomech/sde.hpp"
#include "optomech/stability.hpp"
#include "optomech/verify.hpp"

namespace py = pybind11;
using namespace optomech;

namespace {

py::list mat(const Mat2& m) {
  py::list rows;
  for (int i = 0; i < 2; ++i) {
    py::list row;
    for (int j = 0; j < 2; ++j) row.append(m(i, j));
    rows.append(row);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cavity with a heavily damped mirror: analytic and stochastic routes";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SingularError>(m, "SingularError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init(&ModelParams::make), py::arg("omega_c"), py::arg("omega_m"), py::arg("g"),
           py::arg("gamma1"), py::arg("gamma2"), py::arg("drive"))
      .def_property_readonly("omega_c", &ModelParams::omega_c)
      .def_property_readonly("omega_m", &ModelParams::omega_m)
      .def_property_readonly("g", &ModelParams::g)
      .def_property_readonly("gamma1", &ModelParams::gamma1)
      .def_property_readonly("gamma2", &ModelParams::gamma2)
      .def_property_readonly("drive", &ModelParams::drive)
      .def("with_field", &ModelParams::with_field)
      .def("__repr__", [](const ModelParams& p) {
        std::ostringstream s;
        s << "ModelParams(omega_c=" << p.omega_c() << ", omega_m=" << p.omega_m()
          << ", g=" << p.g() << ", gamma1=" << p.gamma1() << ", gamma2=" << p.gamma2()
          << ", drive=" << p.drive() << ")";
        return s.str();
      });

  py::class_<SteadyState>(m, "SteadyState")
      .def_readonly("alpha0", &SteadyState::alpha0)
      .def_readonly("n", &SteadyState::n)
      .def_readonly("branch_id", &SteadyState::branch_id)
      .def_readonly("mirror_alpha2", &SteadyState::mirror_alpha2);

  py::class_<SpectrumReport>(m, "SpectrumReport")
      .def_readonly("lambda1", &SpectrumReport::lambda1)
      .def_readonly("lambda2", &SpectrumReport::lambda2)
      .def_readonly("stable", &SpectrumReport::stable)
      .def_readonly("margin", &SpectrumReport::margin);

  py::class_<G2Report>(m, "G2Report")
      .def_readonly("branch_id", &G2Report::branch_id)
      .def_readonly("n", &G2Report::n)
      .def_readonly("stable", &G2Report::stable)
      .def_property_readonly("status", [](const G2Report& r) { return to_string(r.status); })
      .def_readonly("g2_covariance", &G2Report::g2_covariance)
      .def_readonly("g2_cov_paper", &G2Report::g2_cov_paper)
      .def_readonly("g2_cov_corrected", &G2Report::g2_cov_corrected)
      .def_readonly("g2_closed_form", &G2Report::g2_closed_form)
      .def_readonly("excess_term", &G2Report::excess_term)
      .def_readonly("antibunched", &G2Report::antibunched);

  m.def("effective_coupling", &effective_coupling);
  m.def("steady_states", &cavity_steady_states);
  m.def("classify", &classify);
  m.def("drift_matrix", [](const SteadyState& s, const ModelParams& p) {
    return mat(drift_matrix(s, p));
  });
  m.def("diffusion_matrix", [](const SteadyState& s, const ModelParams& p) {
    return mat(diffusion_matrix(s, p));
  });
  m.def("covariance", [](const SteadyState& s, const ModelParams& p) {
    return mat(stationary_covariance(linearize(s, p)).matrix());
  });
  m.def(
      "g2_reports",
      [](const ModelParams& p, const std::string& mode) {
        return classify_antibunching(p, parse_expansion_mode(mode));
      },
      py::arg("params"), py::arg("mode") = "paper");
  m.def(
      "simulate",
      [](const ModelParams& p, const std::string& system, double dt, double t_end,
         std::int64_t n_traj, std::uint64_t seed, bool noise) {
        IntegratorConfig c;
        c.dt = dt;
        c.t_end = t_end;
        c.n_traj = n_traj;
        c.seed = seed;
        c.noise = noise;
        EnsembleStats st;
        {
          py::gil_scoped_release release;
          st = simulate(p, c, parse_system_kind(system));
        }
        py::dict d;
        d["mean_n"] = st.mean_n;
        d["se_n"] = st.se_n;
        d["mean_n2"] = st.mean_n2;
        d["g2"] = st.g2_estimate ? py::cast(*st.g2_estimate) : py::none();
        d["g2_se"] = st.g2_se ? py::cast(*st.g2_se) : py::none();
        d["discard_fraction"] = st.discard_fraction();
        return d;
      },
      py::arg("params"), py::arg("system") = "reduced", py::arg("dt") = 1e-3,
      py::arg("t_end") = 10.0, py::arg("n_traj") = 1000, py::arg("seed") = 1,
      py::arg("noise") = true);
  m.def(
      "verify",
      [](const ModelParams& p, bool run_mc) {
        VerifyOptions opt;
        opt.run_mc = run_mc;
        if (run_mc) opt.mc = default_integrator(p);
        return verify_report(p, opt).dump();
      },
      py::arg("params"), py::arg("run_mc") = false);
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
