#include "stemdde/commands.hpp"
#include "stemdde/config.hpp"
#include "stemdde/errors.hpp"
#include "stemdde/maturation.hpp"
#include "stemdde/semiflow.hpp"
#include "stemdde/verification.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace stemdde;

namespace {

HistorySegment segment_from_function(double h, int m, int dim, const py::function& f,
                                     const py::function& fp) {
    if (dim == 1) {
        return HistorySegment::from_function(
            h, m, [f](double t) { return f(t).cast<double>(); },
            [fp](double t) { return fp(t).cast<double>(); });
    }
    return HistorySegment::from_function2(
        h, m, [f](double t) { return f(t).cast<std::array<double, 2>>(); },
        [fp](double t) { return fp(t).cast<std::array<double, 2>>(); });
}

ScalarFn wrap_chi(const py::function& chi) {
    return [chi](double t) { return chi(t).cast<double>(); };
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Simulator for a two-component stem-cell maturation system with a "
              "threshold-defined state-dependent delay";

    py::register_exception<DomainError>(m, "DomainError");
    py::register_exception<ContinuityError>(m, "ContinuityError");
    py::register_exception<ThresholdError>(m, "ThresholdError");
    py::register_exception<ModelViolationError>(m, "ModelViolationError");
    py::register_exception<CompatibilityError>(m, "CompatibilityError");
    py::register_exception<ConfigError>(m, "ConfigurationError");

    py::class_<SegmentNorms>(m, "SegmentNorms")
        .def_readonly("sup_norm", &SegmentNorms::sup_norm)
        .def_readonly("c1_norm", &SegmentNorms::c1_norm);

    py::class_<HistorySegment>(m, "HistorySegment")
        .def_static("constant",
                    [](int dim, double h, double w, double v) {
                        return HistorySegment::constant(dim, h, {w, v});
                    },
                    py::arg("dim"), py::arg("h"), py::arg("w"), py::arg("v") = 0.0)
        .def_static("from_function", &segment_from_function, py::arg("h"), py::arg("m"),
                    py::arg("dim"), py::arg("f"), py::arg("fprime"))
        .def_property_readonly("dim", &HistorySegment::dim)
        .def_property_readonly("h", &HistorySegment::h)
        .def("evaluate", [](const HistorySegment& s, double th) { return s.evaluate(th); })
        .def("derivative", [](const HistorySegment& s, double th) { return s.derivative(th); })
        .def("norms", &HistorySegment::norms)
        .def("component", &HistorySegment::component)
        .def("dump_csv", [](const HistorySegment& s) {
            std::ostringstream os;
            s.dump_csv(os);
            return os.str();
        });

    py::class_<MaturationResult>(m, "MaturationResult")
        .def_readonly("tau", &MaturationResult::tau)
        .def_readonly("F", &MaturationResult::F)
        .def_readonly("threshold_residual", &MaturationResult::threshold_residual)
        .def_readonly("h", &MaturationResult::h)
        .def("y", [](const MaturationResult& r, double s) { return r.y_path.eval(0, s); });

    py::class_<RunConfig>(m, "Config")
        .def_static("from_json", &RunConfig::from_json_string)
        .def_static("load", &RunConfig::load_file)
        .def("to_json", &RunConfig::to_json_string)
        .def("initial_history", &RunConfig::build_initial_history)
        .def_property_readonly("T", [](const RunConfig& c) { return c.T; })
        .def_property_readonly("seed", [](const RunConfig& c) { return c.seed; });

    py::class_<StepRecord>(m, "StepRecord")
        .def_readonly("t", &StepRecord::t)
        .def_readonly("w", &StepRecord::w)
        .def_readonly("v", &StepRecord::v)
        .def_readonly("dw", &StepRecord::dw)
        .def_readonly("dv", &StepRecord::dv)
        .def_readonly("tau", &StepRecord::tau)
        .def_readonly("F", &StepRecord::F)
        .def_readonly("c1norm", &StepRecord::c1norm);

    py::class_<TerminationRecord>(m, "TerminationRecord")
        .def_property_readonly("status",
                               [](const TerminationRecord& t) { return to_string(t.status); })
        .def_readonly("t_stop", &TerminationRecord::t_stop)
        .def_readonly("witness", &TerminationRecord::witness);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("t_end", &Trajectory::t_end)
        .def_property_readonly("records", &Trajectory::records)
        .def("value", &Trajectory::value)
        .def("derivative", &Trajectory::derivative)
        .def("segment_at", &Trajectory::segment_at)
        .def("initial_manifold_residual", &Trajectory::initial_manifold_residual);

    py::class_<SimulationResult>(m, "SimulationResult")
        .def_readonly("trajectory", &SimulationResult::trajectory)
        .def_readonly("termination", &SimulationResult::termination);

    py::class_<Equilibrium>(m, "Equilibrium")
        .def_readonly("w_bar", &Equilibrium::w_bar)
        .def_readonly("v_bar", &Equilibrium::v_bar)
        .def_readonly("residual", &Equilibrium::residual)
        .def_property_readonly("type",
                               [](const Equilibrium& e) {
                                   return std::string(e.trivial ? "trivial" : "nontrivial");
                               });

    m.def("solve_maturation",
          [](const RunConfig& cfg, const HistorySegment& psi, int m_steps) {
              return solve_maturation(cfg.rates, psi, {m_steps});
          },
          py::arg("config"), py::arg("psi"), py::arg("m") = 512);
    m.def("dir_deriv_y",
          [](const RunConfig& cfg, const HistorySegment& psi, const py::function& chi, double t,
             int m_steps) { return dir_deriv_y(cfg.rates, psi, wrap_chi(chi), t, {m_steps}); },
          py::arg("config"), py::arg("psi"), py::arg("chi"), py::arg("t"), py::arg("m") = 512);
    m.def("dir_deriv_tau",
          [](const RunConfig& cfg, const HistorySegment& psi, const py::function& chi,
             int m_steps) { return dir_deriv_tau(cfg.rates, psi, wrap_chi(chi), {m_steps}); },
          py::arg("config"), py::arg("psi"), py::arg("chi"), py::arg("m") = 512);
    m.def("dir_deriv_F",
          [](const RunConfig& cfg, const HistorySegment& psi, const py::function& chi,
             int m_steps) { return dir_deriv_F(cfg.rates, psi, wrap_chi(chi), {m_steps}); },
          py::arg("config"), py::arg("psi"), py::arg("chi"), py::arg("m") = 512);

    m.def("rhs", [](const RunConfig& cfg, const HistorySegment& phi) { return rhs(cfg.rates, phi); });
    m.def("manifold_residual", [](const RunConfig& cfg, const HistorySegment& phi) {
        return manifold_residual(cfg.rates, phi);
    });
    m.def("make_compatible", [](const RunConfig& cfg, const HistorySegment& phi) {
        return make_compatible(cfg.rates, phi, {cfg.integrator.inner_m});
    });
    m.def("integrate",
          [](const RunConfig& cfg, const HistorySegment& phi0, double T) {
              return integrate(cfg.rates, phi0, T > 0.0 ? T : cfg.T, cfg.integrator);
          },
          py::arg("config"), py::arg("phi0"), py::arg("T") = -1.0);
    m.def("voc_residual", [](const RunConfig& cfg, const Trajectory& traj,
                             const std::vector<double>& samples) {
        return voc_residual(cfg.rates, traj, samples, {cfg.integrator.inner_m});
    });
    m.def("find_equilibria",
          [](const RunConfig& cfg, double v_lo, double v_hi, int n_seeds) {
              return find_equilibria(cfg.rates, v_lo, v_hi, n_seeds,
                                     {cfg.integrator.inner_m});
          },
          py::arg("config"), py::arg("v_lo"), py::arg("v_hi"), py::arg("n_seeds") = 256);

    m.def("check_G", [](const RunConfig& cfg) {
        return check_G(cfg.rates, cfg.check.y_lo, cfg.check.y_hi, cfg.check.n_grid).witness_text;
    });
    m.def("run_check", [](const RunConfig& cfg, const std::string& out_dir) {
        return cmd_check(cfg, out_dir);
    });
    m.def("run_simulate", [](const RunConfig& cfg, const std::string& out_dir) {
        return cmd_simulate(cfg, out_dir);
    });
}
