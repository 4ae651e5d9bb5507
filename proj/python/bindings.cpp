#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qpspec/actions.hpp"
#include "qpspec/bloch.hpp"
#include "qpspec/cocycle.hpp"
#include "qpspec/errors.hpp"
#include "qpspec/ladder.hpp"
#include "qpspec/lambdan.hpp"
#include "qpspec/predictor.hpp"
#include "qpspec/regimes.hpp"

namespace py = pybind11;
using namespace qpspec;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral tools for adiabatic quasi-periodic operators";

    py::register_exception<Error>(m, "QpspecError", PyExc_RuntimeError);

    py::class_<PeriodicSpectrum>(m, "PeriodicSpectrum")
        .def_readonly("edges", &PeriodicSpectrum::edges)
        .def_readonly("g", &PeriodicSpectrum::g)
        .def_readonly("diff_coeffs", &PeriodicSpectrum::diff_coeffs)
        .def("gap_residual", &PeriodicSpectrum::gap_residual);
    m.def("build_spectrum", &build_spectrum, py::arg("edges"));
    m.def("k_above", &k_above, py::arg("spectrum"), py::arg("E"));
    m.def("dispersion", &dispersion, py::arg("spectrum"), py::arg("k"));

    py::class_<AdiabaticProblem>(m, "AdiabaticProblem")
        .def(py::init([](const PeriodicSpectrum& s, double alpha, int n, double eps) {
                 return AdiabaticProblem{s, alpha, n, eps};
             }),
             py::arg("spectrum"), py::arg("alpha"), py::arg("n") = 1, py::arg("epsilon") = 0.1)
        .def_readwrite("alpha", &AdiabaticProblem::alpha)
        .def_readwrite("n", &AdiabaticProblem::n)
        .def_readwrite("epsilon", &AdiabaticProblem::epsilon)
        .def_property_readonly("h", &AdiabaticProblem::h);

    py::class_<ActionProfile>(m, "ActionProfile")
        .def_readonly("E", &ActionProfile::E)
        .def_readonly("phi0", &ActionProfile::phi0)
        .def_readonly("phipi", &ActionProfile::phipi)
        .def_readonly("sv0", &ActionProfile::sv0)
        .def_readonly("svpi", &ActionProfile::svpi)
        .def_readonly("sh0", &ActionProfile::sh0)
        .def_readonly("shpi", &ActionProfile::shpi)
        .def_readonly("sh", &ActionProfile::sh)
        .def_readonly("dphi0", &ActionProfile::dphi0)
        .def_readonly("dphipi", &ActionProfile::dphipi);
    m.def("tunneling_profile", &tunneling_profile, py::arg("problem"), py::arg("E"));
    m.def("make_profile", &make_profile, py::arg("E"), py::arg("epsilon"), py::arg("phi0"),
          py::arg("phipi"), py::arg("dphi0"), py::arg("dphipi"), py::arg("sv0"), py::arg("svpi"),
          py::arg("sh0"), py::arg("shpi"));

    py::enum_<Regime>(m, "Regime")
        .value("TauLarge", Regime::TauLarge)
        .value("TauSmallRhoLarge", Regime::TauSmallRhoLarge)
        .value("RhoSmall", Regime::RhoSmall)
        .value("Borderline", Regime::Borderline)
        .value("OutsideWindow", Regime::OutsideWindow);
    py::class_<RegimeReport>(m, "RegimeReport")
        .def_readonly("tau_exp", &RegimeReport::tau_exp)
        .def_readonly("rho_exp", &RegimeReport::rho_exp)
        .def_readonly("delta0", &RegimeReport::delta0)
        .def_readonly("regime", &RegimeReport::regime)
        .def_readonly("tibm", &RegimeReport::tibm);
    m.def("classify", &classify, py::arg("problem"), py::arg("E"), py::arg("delta_tau") = -1.0,
          py::arg("delta_rho") = -1.0);
    m.def(
        "region_map",
        [](const AdiabaticProblem& p, const std::vector<double>& a, const std::vector<double>& e) {
            std::vector<std::tuple<double, double, Regime>> out;
            for (const auto& c : region_map(p, a, e)) out.emplace_back(c.alpha, c.E, c.report.regime);
            return out;
        },
        py::arg("problem"), py::arg("alpha_grid"), py::arg("E_grid"));
    m.def("tibm_polygon", &tibm_polygon, py::arg("spectrum"), py::arg("n"));

    py::class_<ResonantPair>(m, "ResonantPair")
        .def_readonly("E0", &ResonantPair::E0)
        .def_readonly("Epi", &ResonantPair::Epi)
        .def_readonly("Ebar", &ResonantPair::Ebar)
        .def_readonly("Delta", &ResonantPair::Delta)
        .def_readonly("gamma0", &ResonantPair::gamma0)
        .def_readonly("gammapi", &ResonantPair::gammapi);
    m.def(
        "quantize",
        [](const AdiabaticProblem& p, double lo, double hi, bool pi) {
            std::vector<std::pair<int, double>> out;
            for (const auto& e : quantize(p, {lo, hi}, pi ? Nu::Pi : Nu::Zero).entries)
                out.emplace_back(e.l, e.E);
            return out;
        },
        py::arg("problem"), py::arg("lo"), py::arg("hi"), py::arg("pi") = false);
    m.def("make_pair", &make_pair, py::arg("E0"), py::arg("Epi"), py::arg("profile"),
          py::arg("delta0") = 0.0, py::arg("z0") = 0.0, py::arg("zpi") = 0.25, py::arg("sigma") = 1);

    py::class_<PredictedInterval>(m, "PredictedInterval")
        .def_readonly("lo", &PredictedInterval::lo)
        .def_readonly("hi", &PredictedInterval::hi)
        .def_property_readonly("label", [](const PredictedInterval& i) { return label_name(i.label); })
        .def_readonly("dos_weight", &PredictedInterval::dos_weight);
    py::class_<SpectralPrediction>(m, "SpectralPrediction")
        .def_readonly("regime", &SpectralPrediction::regime)
        .def_readonly("intervals", &SpectralPrediction::intervals)
        .def_property_readonly("gap",
                               [](const SpectralPrediction& s) -> std::optional<std::pair<double, double>> {
                                   if (!s.gap) return std::nullopt;
                                   return std::make_pair(s.gap->lo, s.gap->hi);
                               })
        .def_readonly("scenario", &SpectralPrediction::scenario);
    m.def("predict", &predict, py::arg("pair"), py::arg("Lambda"), py::arg("samples") = 201);

    py::class_<ModelCocycle>(m, "ModelCocycle")
        .def(py::init<>())
        .def_readwrite("sigma", &ModelCocycle::sigma)
        .def_readwrite("tau", &ModelCocycle::tau)
        .def_readwrite("theta", &ModelCocycle::theta)
        .def_readwrite("gamma0", &ModelCocycle::gamma0)
        .def_readwrite("E0", &ModelCocycle::E0)
        .def_readwrite("gammapi", &ModelCocycle::gammapi)
        .def_readwrite("Epi", &ModelCocycle::Epi)
        .def_readwrite("z0", &ModelCocycle::z0)
        .def_readwrite("zpi", &ModelCocycle::zpi)
        .def_readwrite("h", &ModelCocycle::h)
        .def_readwrite("epsilon", &ModelCocycle::epsilon);
    m.def("h_from_epsilon", &h_from_epsilon, py::arg("epsilon"));
    m.def(
        "model_matrix", [](const ModelCocycle& mc, double z, double E) { return model_matrix(mc, z, E); },
        py::arg("cocycle"), py::arg("z"), py::arg("E"));
    py::class_<LyapunovResult>(m, "LyapunovResult")
        .def_readonly("theta_cocycle", &LyapunovResult::theta_cocycle)
        .def_readonly("Theta_operator", &LyapunovResult::Theta_operator)
        .def_readonly("converged", &LyapunovResult::converged)
        .def_readonly("log_det", &LyapunovResult::log_det);
    m.def("lyapunov", &lyapunov, py::arg("cocycle"), py::arg("E"), py::arg("iterations") = 100000,
          py::arg("z_init") = 0.0);
    m.def(
        "resolvent_verdict",
        [](const ModelCocycle& mc, cplx E, int grid) {
            return std::string(verdict_name(resolvent_test(mc, E, grid).kind));
        },
        py::arg("cocycle"), py::arg("E"), py::arg("grid") = 2048);
    m.def(
        "ids_increment",
        [](const ModelCocycle& mc, double a, double b, int grid) {
            return ids_increment(mc, semicircle(a, b), grid);
        },
        py::arg("cocycle"), py::arg("a"), py::arg("b"), py::arg("grid") = 2048);

    py::class_<TwoGapSurface>(m, "TwoGapSurface")
        .def_readonly("edges", &TwoGapSurface::edges)
        .def_readonly("Xi1", &TwoGapSurface::Xi1)
        .def_readonly("Xi2", &TwoGapSurface::Xi2);
    m.def("make_surface", &make_surface, py::arg("edges"));
    py::class_<Calibration>(m, "Calibration")
        .def_readonly("surface", &Calibration::surface)
        .def_readonly("period_residual", &Calibration::period_residual)
        .def_readonly("x_residual", &Calibration::x_residual);
    m.def("calibrate", &calibrate, py::arg("seed"), py::arg("tol") = 1e-9);
    py::class_<PoleConfig>(m, "PoleConfig")
        .def(py::init([](double P1, double P2, int s1, int s2) { return PoleConfig{P1, P2, s1, s2}; }),
             py::arg("P1"), py::arg("P2"), py::arg("s1") = 1, py::arg("s2") = 1)
        .def_readonly("P1", &PoleConfig::P1)
        .def_readonly("P2", &PoleConfig::P2)
        .def_readonly("s1", &PoleConfig::s1)
        .def_readonly("s2", &PoleConfig::s2);
    m.def("poles_from_times", &poles_from_times, py::arg("surface"), py::arg("t1"), py::arg("t2"));
    m.def("shift_poles", &shift_poles, py::arg("surface"), py::arg("poles"), py::arg("dt"));
    m.def(
        "l1", [](const TwoGapSurface& s, const PoleConfig& p) { return l1(s, p).l1; },
        py::arg("surface"), py::arg("poles"));
    m.def(
        "theta_lambda",
        [](double l) {
            auto t = theta_lambda(l);
            return std::make_pair(t.theta, t.Lambda);
        },
        py::arg("l"));
    m.def(
        "degenerate_scaling_probe",
        [](const TwoGapSurface& s, const std::vector<double>& deltas) {
            auto r = degenerate_scaling_probe(s, deltas);
            return py::dict(py::arg("slope") = r.slope, py::arg("prefactor") = r.prefactor,
                            py::arg("F0_abs") = r.F0_abs, py::arg("d2F") = r.d2F);
        },
        py::arg("surface"), py::arg("deltas"));
}
