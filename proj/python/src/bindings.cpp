#include "wacrisk/delay_stability.hpp"
#include "wacrisk/errors.hpp"
#include "wacrisk/gain_synthesis.hpp"
#include "wacrisk/network_io.hpp"
#include "wacrisk/risk_engine.hpp"
#include "wacrisk/sdde_oracle.hpp"
#include "wacrisk/spectral_function.hpp"
#include "wacrisk/steady_state_stats.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wacrisk;

namespace {

// gains: a (mu, kappa) pair of scalars for consensus, or per-mode vectors
GainSpec gains_from(const py::object& mu, const py::object& kappa) {
    if (py::isinstance<py::float_>(mu) || py::isinstance<py::int_>(mu)) {
        return ConsensusGains{mu.cast<double>(), kappa.cast<double>()};
    }
    return EigenGains{mu.cast<Eigen::VectorXd>(), kappa.cast<Eigen::VectorXd>()};
}

py::dict verdict_dict(const StabilityVerdict& v) {
    py::dict d;
    d["stable"] = v.stable;
    d["region"] = to_string(v.region);
    d["boundary"] = v.boundary;
    d["margin"] = v.margin;
    d["critical_delay_ratio"] = v.critical_delay_ratio ? py::cast(*v.critical_delay_ratio) : py::none();
    return d;
}

py::list pairs_list(const PairStats& st) {
    py::list out;
    for (const auto& p : st.pairs) out.append(py::make_tuple(p.i, p.j, p.sigma));
    return out;
}

StabilityOptions stab_opts(bool table_only) {
    StabilityOptions o;
    o.table_only = table_only;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Compiled core of wacrisk";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

    py::class_<ScaledParams>(m, "ScaledParams")
        .def(py::init<double, double, double, double>(), py::arg("s1"), py::arg("s2"), py::arg("k1"),
             py::arg("k2"))
        .def_readwrite("s1", &ScaledParams::s1)
        .def_readwrite("s2", &ScaledParams::s2)
        .def_readwrite("k1", &ScaledParams::k1)
        .def_readwrite("k2", &ScaledParams::k2)
        .def("__repr__", [](const ScaledParams& s) {
            return "ScaledParams(" + format_number(s.s1) + ", " + format_number(s.s2) + "; " +
                   format_number(s.k1) + ", " + format_number(s.k2) + ")";
        });

    m.def("scale", &scale, py::arg("d"), py::arg("lam"), py::arg("mu"), py::arg("kappa"), py::arg("tau"));
    m.def(
        "membership",
        [](const ScaledParams& sp, bool table_only) { return verdict_dict(membership_w(sp, stab_opts(table_only))); },
        py::arg("sp"), py::arg("table_only") = false);
    m.def("rightmost_root", &rightmost_root, py::arg("sp"), py::arg("resolution") = 128);
    m.def("characteristic", &characteristic, py::arg("sp"), py::arg("eta"));

    m.def(
        "f",
        [](const ScaledParams& sp, double tol) {
            const auto e = f_quadrature(sp, tol);
            return py::make_tuple(e.value, e.abs_error_estimate, e.diverging);
        },
        py::arg("sp"), py::arg("tol") = 1e-8);
    m.def("f_lower_bound", &f_lower_bound, py::arg("sp"));
    m.def("impulse_integral", [](const ScaledParams& sp) { return impulse_response(sp).integral_sq; },
          py::arg("sp"));
    m.def(
        "frak_f",
        [](std::size_t l, double lambda, double mu, double kappa, double d, double tau, double eta,
           double eta_meas, double J, double tol) {
            return frak_f(l, lambda, mu, kappa, d, tau, {eta, eta_meas}, J, tol);
        },
        py::arg("l"), py::arg("lam"), py::arg("mu"), py::arg("kappa"), py::arg("d"),
          py::arg("tau"), py::arg("eta"), py::arg("eta_meas"), py::arg("J"), py::arg("tol") = 1e-8);

    py::class_<SystemicSet>(m, "SystemicSet")
        .def(py::init<double, double, double>(), py::arg("zeta"), py::arg("c"), py::arg("eps"))
        .def_property_readonly("zeta", &SystemicSet::zeta)
        .def_property_readonly("c", &SystemicSet::c)
        .def_property_readonly("eps", &SystemicSet::eps)
        .def_property_readonly("nu", &SystemicSet::nu)
        .def_property_readonly("safe_sigma", &SystemicSet::safe_sigma)
        .def_property_readonly("critical_sigma", &SystemicSet::critical_sigma);
    m.def("nu_epsilon", &nu_epsilon, py::arg("eps"), py::arg("tol") = 1e-10);
    m.def("risk", &risk_value, py::arg("sigma"), py::arg("set"));
    m.def("risk_from_definition", &risk_from_definition, py::arg("sigma"), py::arg("set"), py::arg("tol") = 1e-12);

    py::class_<LaplacianSpectrum>(m, "Spectrum")
        .def_readonly("laplacian", &LaplacianSpectrum::laplacian)
        .def_readonly("eigenvalues", &LaplacianSpectrum::eigenvalues)
        .def_readonly("eigenvectors", &LaplacianSpectrum::eigenvectors);
    m.def("decompose_laplacian", &decompose_laplacian, py::arg("laplacian"));
    m.def("load_network", [](const std::string& path) { return build_laplacian(load_network_json(path)); },
          py::arg("path"));

    m.def(
        "network_stable",
        [](const LaplacianSpectrum& s, const py::object& mu, const py::object& kappa, double d, double tau,
           bool table_only) {
            const auto v = network_stable(resolve_gains(s, gains_from(mu, kappa)), d, tau, stab_opts(table_only));
            py::list modes;
            for (const auto& mv : v.modes) {
                py::dict md = verdict_dict(mv.verdict);
                md["mode"] = mv.mode;
                md["lambda"] = mv.lambda;
                modes.append(md);
            }
            return py::make_tuple(v.stable, modes);
        },
        py::arg("spectrum"), py::arg("mu"), py::arg("kappa"), py::arg("d"), py::arg("tau"),
        py::arg("table_only") = false);

    m.def(
        "sigma_pairs",
        [](const LaplacianSpectrum& s, const py::object& mu, const py::object& kappa, double d, double tau,
           double eta, double eta_meas, double J) {
            return pairs_list(sigma_pairs(resolve_gains(s, gains_from(mu, kappa)), d, tau, {eta, eta_meas}, J));
        },
        py::arg("spectrum"), py::arg("mu"), py::arg("kappa"), py::arg("d"), py::arg("tau"), py::arg("eta"),
        py::arg("eta_meas"), py::arg("J"));

    m.def(
        "synthesize",
        [](const LaplacianSpectrum& s, double d, double tau, double eta, double eta_meas, double J,
           std::array<double, 6> box) {
            SynthesisOptions o;
            o.gain_box = {box[0], box[1], box[2], box[3], box[4], box[5]};
            const auto r = synthesize(s, d, tau, {eta, eta_meas}, J, o);
            py::list modes;
            for (const auto& mo : r.modes) {
                modes.append(py::dict(py::arg("mode") = mo.mode, py::arg("lambda") = mo.lambda,
                                      py::arg("mu") = mo.mu, py::arg("kappa") = mo.kappa,
                                      py::arg("weight") = mo.weight, py::arg("grid_mu") = mo.grid_mu,
                                      py::arg("grid_kappa") = mo.grid_kappa));
            }
            return py::make_tuple(modes, r.M, r.K, pairs_list(r.stats));
        },
        py::arg("spectrum"), py::arg("d"), py::arg("tau"), py::arg("eta"), py::arg("eta_meas"), py::arg("J"),
        py::arg("box") = std::array<double, 6>{-1.0, 1.0, 0.0, 5.0, 0.05, 0.05});

    m.def(
        "sigma_star",
        [](const LaplacianSpectrum& s, double d, double tau, double eta, double J, std::array<double, 6> box) {
            SynthesisOptions o;
            o.gain_box = {box[0], box[1], box[2], box[3], box[4], box[5]};
            return sigma_star(s, d, tau, eta, J, o).sigma_star;
        },
        py::arg("spectrum"), py::arg("d"), py::arg("tau"), py::arg("eta"), py::arg("J"),
        py::arg("box") = std::array<double, 6>{-1.0, 1.0, 0.0, 5.0, 0.05, 0.05});

    m.def(
        "simulate",
        [](const LaplacianSpectrum& s, const py::object& mu, const py::object& kappa, double d, double tau,
           double eta, double eta_meas, double J, std::size_t trajectories, double T, double h,
           std::uint64_t seed) {
            SimConfig cfg;
            cfg.trajectories = trajectories;
            cfg.T = T;
            cfg.h = h;
            cfg.seed = seed;
            const auto e = simulate(resolve_gains(s, gains_from(mu, kappa)), d, tau, {eta, eta_meas}, J, cfg);
            py::list out;
            for (const auto& p : e.pairs) out.append(py::make_tuple(p.i, p.j, p.variance, p.std_error));
            return out;
        },
        py::arg("spectrum"), py::arg("mu"), py::arg("kappa"), py::arg("d"), py::arg("tau"), py::arg("eta"),
        py::arg("eta_meas"), py::arg("J"), py::arg("trajectories") = 1000, py::arg("T") = 30.0,
        py::arg("h") = 0.005, py::arg("seed") = 1);
}
