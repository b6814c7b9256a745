#include "qbm/force.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qbm/errors.hpp"
#include "qbm/quadrature.hpp"

namespace qbm {

ForceProfile ForceProfile::constant(double f0) {
    ForceProfile f;
    f.kind = ForceKind::Constant;
    f.amplitude = f0;
    return f;
}

ForceProfile ForceProfile::sinusoidal(double f0, double omega_d, double phase) {
    ForceProfile f;
    f.kind = ForceKind::Sinusoidal;
    f.amplitude = f0;
    f.frequency = omega_d;
    f.phase = phase;
    return f;
}

ForceProfile ForceProfile::tabulated(std::vector<double> times, std::vector<double> values) {
    ForceProfile f;
    f.kind = ForceKind::Tabulated;
    f.times = std::move(times);
    f.values = std::move(values);
    f.validate();
    return f;
}

ForceProfile ForceProfile::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open force table " + path);
    std::vector<double> ts, fs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double t = 0.0, f = 0.0;
        if (!(row >> t >> f)) {
            if (ts.empty() && lineno == 1) continue;
            throw Error(ErrorKind::ConfigError, path + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        ts.push_back(t);
        fs.push_back(f);
    }
    try {
        return tabulated(std::move(ts), std::move(fs));
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, path + ": " + e.what());
    }
}

void ForceProfile::validate() const {
    if (kind != ForceKind::Tabulated) {
        if (!std::isfinite(amplitude) || !std::isfinite(frequency) || !std::isfinite(phase))
            throw Error(ErrorKind::InvalidSpec, "force parameters must be finite");
        return;
    }
    if (times.size() != values.size() || times.size() < 2)
        throw Error(ErrorKind::InvalidSpec, "tabulated force needs at least two (t, F) samples");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
            throw Error(ErrorKind::InvalidSpec, "tabulated force has non-finite entries");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw Error(ErrorKind::InvalidSpec, "tabulated force times must be strictly increasing");
    }
}

double ForceProfile::operator()(double t) const {
    switch (kind) {
        case ForceKind::Constant: return amplitude;
        case ForceKind::Sinusoidal: return amplitude * std::sin(frequency * t + phase);
        case ForceKind::Tabulated: break;
    }
    if (t < times.front() || t > times.back())
        throw Error(ErrorKind::DomainError, "time outside the tabulated force range");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.end()) return values.back();
    const std::size_t i = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - w) * values[i - 1] + w * values[i];
}

Vec2 forced_mean_shift(const ForceProfile& force, double t, const OscillatorSpec& osc, double rel_tol) {
    if (!(t >= 0.0)) throw Error(ErrorKind::DomainError, "forced_mean_shift requires t >= 0");
    force.validate();
    if (t == 0.0) return Vec2::Zero();
    if (force.kind == ForceKind::Tabulated && (force.times.front() > 0.0 || force.times.back() < t))
        throw Error(ErrorKind::DomainError, "tabulated force does not cover [0, t]");

    auto f = [&](double s) -> Vec2 { return force(s) * propagator(t - s, osc).col(1); };
    std::vector<double> pts{0.0, t};
    if (force.kind == ForceKind::Tabulated)
        for (double ti : force.times)
            if (ti > 0.0 && ti < t) pts.push_back(ti);
    double scale = osc.omega_r() + osc.gamma0();
    if (force.kind == ForceKind::Sinusoidal) scale = std::max(scale, std::abs(force.frequency));
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-15 * (std::abs(force.amplitude) + 1e-300);
    if (force.kind == ForceKind::Tabulated) {
        double fmax = 0.0;
        for (double v : force.values) fmax = std::max(fmax, std::abs(v));
        opt.abs_tol = 1e-15 * (fmax + 1e-300);
    }
    opt.max_width = pi / (2.0 * scale);
    return integrate(f, pts, opt).value;
}

FourierWignerState evolve_forced(const FourierWignerState& state0, double t, const ForceProfile& force,
                                 const OscillatorSpec& osc, const ThermalCovariance& sigma) {
    FourierWignerState out = evolve_cumulants(state0, t, osc, sigma);
    out.mean += forced_mean_shift(force, t, osc);
    return out;
}

}  // namespace qbm
