#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qbm/cli.hpp"
#include "qbm/coefficients.hpp"
#include "qbm/errors.hpp"
#include "qbm/force.hpp"
#include "qbm/parametric.hpp"
#include "qbm/special.hpp"
#include "qbm/wigner.hpp"

namespace py = pybind11;
using namespace qbm;

namespace {

FourierWignerState gaussian(const Vec2& mean, const Mat2& cov) {
    FourierWignerState s;
    s.mean = mean;
    s.covariance = cov;
    return s;
}

py::dict state_dict(const FourierWignerState& s) {
    py::dict d;
    d["mean"] = s.mean;
    d["covariance"] = s.covariance;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qbm, m) {
    m.doc() = "Quantum Brownian motion coefficients and Fourier-domain Wigner evolution";
    m.attr("__version__") = cli::version;

    py::register_exception<Error>(m, "QbmError", PyExc_RuntimeError);

    py::class_<OscillatorSpec>(m, "Oscillator")
        .def(py::init<double, double, double>(), py::arg("mass") = 1.0, py::arg("omega_r") = 1.0,
             py::arg("gamma0") = 0.3)
        .def_property_readonly("mass", &OscillatorSpec::mass)
        .def_property_readonly("omega_r", &OscillatorSpec::omega_r)
        .def_property_readonly("gamma0", &OscillatorSpec::gamma0)
        .def_property_readonly("underdamped", &OscillatorSpec::underdamped);

    py::class_<BathSpec>(m, "Bath")
        .def(py::init([](double temperature, double cutoff_uv, double cutoff_ir, std::vector<double> supra,
                         std::vector<double> sub) {
                 BathSpec b;
                 b.temperature = temperature;
                 b.cutoff_uv = cutoff_uv;
                 b.cutoff_ir = cutoff_ir;
                 b.supraohmic = std::move(supra);
                 b.subohmic = std::move(sub);
                 return b;
             }),
             py::arg("temperature") = 1.0, py::arg("cutoff_uv") = 1000.0, py::arg("cutoff_ir") = 0.0,
             py::arg("supraohmic") = std::vector<double>{}, py::arg("subohmic") = std::vector<double>{})
        .def_readwrite("temperature", &BathSpec::temperature)
        .def_readwrite("cutoff_uv", &BathSpec::cutoff_uv)
        .def_readwrite("cutoff_ir", &BathSpec::cutoff_ir)
        .def_readwrite("supraohmic", &BathSpec::supraohmic)
        .def_readwrite("subohmic", &BathSpec::subohmic);

    py::class_<DiffusionPair>(m, "DiffusionPair")
        .def_readonly("d_xp", &DiffusionPair::d_xp)
        .def_readonly("d_pp", &DiffusionPair::d_pp)
        .def_readonly("t", &DiffusionPair::t)
        .def_readonly("warnings", &DiffusionPair::warnings)
        .def_property_readonly("method", [](const DiffusionPair& d) { return std::string(to_string(d.method)); })
        .def("__repr__", [](const DiffusionPair& d) {
            std::ostringstream os;
            os.precision(10);
            os << "DiffusionPair(d_xp=" << d.d_xp << ", d_pp=" << d.d_pp << ", method=" << to_string(d.method) << ")";
            return os.str();
        });

    m.def("harmonic_number", py::overload_cast<cplx>(&harmonic_number), py::arg("z"));
    m.def("exp_integral_e1", &exp_integral_e1, py::arg("z"));

    m.def("fc_n_oracle", [](int n, double t, const OscillatorSpec& o, const BathSpec& b) { return fc_n_oracle(n, t, o, b); },
          py::arg("n"), py::arg("t"), py::arg("osc"), py::arg("bath"));
    m.def("fc1", [](double t, const OscillatorSpec& o, const BathSpec& b, const std::string& method) {
              return fc1_by_method(t, o, b, method_from_string(method));
          },
          py::arg("t"), py::arg("osc"), py::arg("bath"), py::arg("method") = "general");
    m.def("diffusion_at", [](double t, const OscillatorSpec& o, const BathSpec& b, const std::string& method) {
              return diffusion_at(t, o, b, method_from_string(method));
          },
          py::arg("t"), py::arg("osc"), py::arg("bath"), py::arg("method") = "general");
    m.def("diffusion_late", &diffusion_late, py::arg("osc"), py::arg("bath"));
    m.def("diffusion_late_subtracted", &diffusion_late_subtracted, py::arg("osc"), py::arg("bath"));
    m.def("diffusion_ccr", &diffusion_ccr, py::arg("osc"), py::arg("bath"));
    m.def("diffusion_extreme_t", &diffusion_extreme_t, py::arg("osc"), py::arg("bath"));

    m.def("propagator", &propagator, py::arg("t"), py::arg("osc"));
    m.def("equilibrium_covariance", &equilibrium_covariance, py::arg("osc"), py::arg("bath"));
    m.def("thermal_covariance",
          [](const std::vector<double>& ts, const OscillatorSpec& o, const BathSpec& b, const std::string& method) {
              double t_max = 0.0;
              for (double t : ts) t_max = std::max(t_max, t);
              const ThermalCovariance sigma(o, b, method_from_string(method), {}, t_max);
              std::vector<Mat2> out;
              for (double t : ts) out.push_back(sigma.at(t));
              return out;
          },
          py::arg("times"), py::arg("osc"), py::arg("bath"), py::arg("method") = "general");
    m.def("evolve_gaussian",
          [](const Vec2& mean, const Mat2& cov, double t, const OscillatorSpec& o, const BathSpec& b,
             const std::string& method) {
              const ThermalCovariance sigma(o, b, method_from_string(method), {}, t);
              return state_dict(evolve_cumulants(gaussian(mean, cov), t, o, sigma));
          },
          py::arg("mean"), py::arg("covariance"), py::arg("t"), py::arg("osc"), py::arg("bath"),
          py::arg("method") = "general");
    m.def("linear_entropy", [](const Mat2& cov) { return linear_entropy(gaussian(Vec2::Zero(), cov)); },
          py::arg("covariance"));
    m.def("forced_mean_shift",
          [](double t, const OscillatorSpec& o, double amplitude, double frequency, double phase) {
              const ForceProfile f = frequency == 0.0 && phase == 0.0
                                         ? ForceProfile::constant(amplitude)
                                         : ForceProfile::sinusoidal(amplitude, frequency, phase);
              return forced_mean_shift(f, t, o);
          },
          py::arg("t"), py::arg("osc"), py::arg("amplitude"), py::arg("frequency") = 0.0, py::arg("phase") = 0.0);
    m.def("transition_matrix",
          [](const std::vector<double>& ts, double mass, double omega_r, double gamma0, double a_gamma, double nu,
             double a_omega) {
              double t_max = 0.0;
              for (double t : ts) t_max = std::max(t_max, t);
              const auto drift = TimeDependentDrift::sinusoidal(mass, omega_r, gamma0, a_gamma, nu, a_omega);
              const auto phi = solve_transition(drift, t_max);
              std::vector<Mat2> out;
              for (double t : ts) out.push_back(phi.at(t));
              return out;
          },
          py::arg("times"), py::arg("mass") = 1.0, py::arg("omega_r") = 1.0, py::arg("gamma0") = 0.3,
          py::arg("a_gamma") = 0.0, py::arg("nu") = 1.0, py::arg("a_omega") = 0.0);
    m.def("run_cli",
          [](const std::string& command, const std::string& config_text, const std::string& out_dir) {
              std::ostringstream err;
              const int code = cli::run(command, config_text, ".", out_dir, err);
              return py::make_tuple(code, err.str());
          },
          py::arg("command"), py::arg("config_text"), py::arg("out_dir"));
}
