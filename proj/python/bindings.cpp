#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "kgfilon/cli.hpp"
#include "kgfilon/filon.hpp"
#include "kgfilon/harness.hpp"
#include "kgfilon/reference.hpp"
#include "kgfilon/spectral.hpp"
#include "kgfilon/stepper.hpp"

namespace py = pybind11;
using namespace kgfilon;

namespace {

using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

CVector to_vector(const ComplexArray& a, const SpectralGrid& grid, const char* name) {
    if (a.ndim() != 1) throw InvalidArgument(std::string(name) + " must be one-dimensional");
    CVector v(a.data(), a.data() + a.size());
    grid.require_size(v.size(), name);
    return v;
}

ComplexArray to_array(const CVector& v) {
    ComplexArray out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<double> to_array(std::span<const double> v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

FieldState make_state(const SpectralGrid& grid, const ComplexArray& psi, const ComplexArray& dpsi, double t) {
    FieldState s;
    s.psi = to_vector(psi, grid, "psi");
    s.dpsi = to_vector(dpsi, grid, "dpsi");
    s.t = t;
    return s;
}

py::tuple state_tuple(const FieldState& s) { return py::make_tuple(to_array(s.psi), to_array(s.dpsi)); }

ExperimentConfig make_config(const std::string& problem, double omega, std::vector<long> steps,
                             const std::vector<std::string>& methods, long ref_steps, int grid_m, double t_final,
                             double m0, int timing_repeats) {
    ExperimentConfig cfg;
    cfg.problem = parse_problem(problem);
    cfg.omega = omega;
    cfg.steps_list = std::move(steps);
    cfg.methods.clear();
    for (const auto& id : methods) cfg.methods.push_back(parse_method(id));
    cfg.reference.steps = ref_steps;
    cfg.grid_m = grid_m;
    cfg.t_final = t_final;
    cfg.m0 = m0;
    cfg.timing_repeats = timing_repeats;
    return cfg;
}

py::list records_to_list(const std::vector<RunRecord>& records) {
    py::list out;
    for (const auto& r : records) {
        py::dict d;
        d["method"] = std::string(method_id(r.method));
        d["K"] = r.K;
        d["h"] = r.h;
        d["omega_max"] = r.omega_max;
        d["error_l2"] = r.error_l2;
        d["runtime_seconds"] = r.runtime_seconds;
        d["slope_estimate"] = r.slope_estimate ? py::cast(*r.slope_estimate) : py::none();
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_kgfilon, m) {
    m.doc() = "Klein-Gordon solver with Filon-type exponential integration.";

    // Translators are tried most-recently-registered first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<NonFiniteState>(m, "NonFiniteState", PyExc_ArithmeticError);
    py::register_exception<CrossCheckFailure>(m, "CrossCheckFailure", PyExc_RuntimeError);

    py::class_<SpectralGrid>(m, "Grid", "Periodic Fourier grid on [x0, x1) with m nodes.")
        .def(py::init(&build_grid), py::arg("x0") = -10.0, py::arg("x1") = 10.0, py::arg("m") = 200)
        .def_property_readonly("x0", &SpectralGrid::x0)
        .def_property_readonly("x1", &SpectralGrid::x1)
        .def_property_readonly("dx", &SpectralGrid::dx)
        .def_property_readonly("size", &SpectralGrid::size)
        .def_property_readonly("nodes", [](const SpectralGrid& g) { return to_array(g.nodes()); })
        .def_property_readonly("symbols", [](const SpectralGrid& g) { return to_array(g.symbols()); })
        .def("__len__", &SpectralGrid::size);

    py::class_<MassModel>(m, "MassModel", "Mass coefficient m(x, t) as a sum of modulated terms.")
        .def_static("example1", &preset_example1, py::arg("omega"), "-(1 + cos(omega t)) x^2")
        .def_static("example2", &preset_example2, "-sum_{n=0}^{5} (1 + cos(10^n t)) x^2")
        .def_static("constant", &preset_constant, py::arg("m0"))
        .def_static("zero", &MassModel::zero)
        .def_property_readonly("omega_max", &MassModel::omega_max)
        .def("truncated", &MassModel::truncated, py::arg("cutoff"))
        .def("__len__", &MassModel::size)
        .def(
            "evaluate", [](const MassModel& model, const SpectralGrid& g, double t) { return to_array(evaluate(model, g, t)); },
            py::arg("grid"), py::arg("t"));

    m.def(
        "moments",
        [](double omega, double h) {
            const auto mu = moments(omega, h);
            return py::make_tuple(mu.mu1, mu.mu2, mu.mu3);
        },
        py::arg("omega"), py::arg("h"), "(mu_1, mu_2, mu_3) with mu_j = int_0^h tau^(j-1) exp(i omega tau) dtau");

    m.def(
        "gaussian_initial_state",
        [](const SpectralGrid& g) { return state_tuple(gaussian_initial_state(g, 0.0)); }, py::arg("grid"),
        "(psi, dpsi) = (exp(-x^2/2), 0) on the nodes");

    m.def(
        "free_propagator",
        [](const SpectralGrid& g, double t, const ComplexArray& psi, const ComplexArray& dpsi) {
            return state_tuple(free_propagator(g, t, make_state(g, psi, dpsi, 0.0)));
        },
        py::arg("grid"), py::arg("t"), py::arg("psi"), py::arg("dpsi"));

    m.def(
        "constant_mass_exact",
        [](const SpectralGrid& g, double m0, double t, const ComplexArray& psi, const ComplexArray& dpsi) {
            return state_tuple(constant_mass_exact(g, m0, t, make_state(g, psi, dpsi, 0.0)));
        },
        py::arg("grid"), py::arg("m0"), py::arg("t"), py::arg("psi"), py::arg("dpsi"));

    m.def(
        "solve",
        [](const std::string& method, const SpectralGrid& g, const MassModel& model, const ComplexArray& psi,
           const ComplexArray& dpsi, double h, long steps, double t0) {
            const FieldState s0 = make_state(g, psi, dpsi, t0);
            const Method meth = parse_method(method);
            FieldState out;
            {
                py::gil_scoped_release release;
                out = solve(meth, g, model, s0, h, steps);
            }
            return state_tuple(out);
        },
        py::arg("method"), py::arg("grid"), py::arg("model"), py::arg("psi"), py::arg("dpsi"), py::arg("h"),
        py::arg("steps"), py::arg("t0") = 0.0, "K steps of the named method; returns (psi, dpsi) at t0 + K*h");

    m.def(
        "run_convergence",
        [](const std::string& problem, double omega, std::vector<long> steps, const std::vector<std::string>& methods,
           long ref_steps, int grid_m, double t_final, double m0, int timing_repeats) {
            const ExperimentConfig cfg =
                make_config(problem, omega, std::move(steps), methods, ref_steps, grid_m, t_final, m0, timing_repeats);
            std::vector<RunRecord> records;
            {
                py::gil_scoped_release release;
                records = run_convergence(cfg);
            }
            return records_to_list(records);
        },
        py::arg("problem") = "example1", py::arg("omega") = 10.0,
        py::arg("steps") = std::vector<long>{20, 40, 80, 160, 320},
        py::arg("methods") = std::vector<std::string>{"xi3-filon"}, py::arg("ref_steps") = 100000,
        py::arg("grid_m") = 200, py::arg("t_final") = 1.0, py::arg("m0") = -1.0, py::arg("timing_repeats") = 0,
        "Errors against the reference for every (method, K); one dict per run");

    m.def(
        "run_omega_sweep",
        [](const std::vector<double>& omegas, std::vector<long> steps, const std::vector<std::string>& methods,
           long ref_steps, int grid_m, double t_final, int timing_repeats) {
            const ExperimentConfig cfg = make_config("example1", 1.0, std::move(steps), methods, ref_steps, grid_m,
                                                     t_final, -1.0, timing_repeats);
            std::vector<RunRecord> records;
            {
                py::gil_scoped_release release;
                records = run_omega_sweep(cfg, omegas);
            }
            return records_to_list(records);
        },
        py::arg("omegas"), py::arg("steps") = std::vector<long>{20, 40, 80, 160, 320},
        py::arg("methods") = std::vector<std::string>{"xi3-filon"}, py::arg("ref_steps") = 100000,
        py::arg("grid_m") = 200, py::arg("t_final") = 1.0, py::arg("timing_repeats") = 0);

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"kgfilon"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr)");
}
